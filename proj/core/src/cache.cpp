#include "flows/cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "flows/date.hpp"

namespace flows {
namespace fs = std::filesystem;

namespace {

bool valid_key(const std::string& key) {
  if (key.empty() || key.size() > 128) return false;
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw CacheError("cannot create cache directory '" + dir_.string() + "'");
}

std::mutex& ResponseCache::stripe(const std::string& key) const {
  return stripes_[std::hash<std::string>{}(key) % stripes_.size()];
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  if (!valid_key(key)) throw CacheError("invalid cache key '" + key + "'");
  std::lock_guard lock(stripe(key));
  const fs::path path = dir_ / key;
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    if (ec) throw CacheError("cannot stat '" + path.string() + "': " + ec.message());
    return std::nullopt;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("cannot read '" + path.string() + "'");
  std::string header;
  if (!std::getline(in, header)) throw CacheError("corrupt cache entry '" + path.string() + "'");
  std::istringstream hs(header);
  std::string magic, stored_at;
  int version = 0;
  std::uint64_t length = 0;
  if (!(hs >> magic >> version >> stored_at >> length) || magic != "flows-cache" || version != 1) {
    throw CacheError("corrupt cache header in '" + path.string() + "'");
  }
  std::string body(length, '\0');
  in.read(body.data(), static_cast<std::streamsize>(length));
  if (static_cast<std::uint64_t>(in.gcount()) != length || in.peek() != std::char_traits<char>::eof()) {
    throw CacheError("truncated cache entry '" + path.string() + "'");
  }
  return body;
}

void ResponseCache::store(const std::string& key, const std::string& response) {
  if (!valid_key(key)) throw CacheError("invalid cache key '" + key + "'");
  static std::atomic<std::uint64_t> tmp_counter{0};
  std::lock_guard lock(stripe(key));
  const fs::path final_path = dir_ / key;
  const fs::path tmp = dir_ / fmt::format(".{}.tmp{}", key, ++tmp_counter);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CacheError("cannot write '" + tmp.string() + "'");
    out << "flows-cache 1 " << format_timestamp(std::chrono::system_clock::now()) << ' ' << response.size() << '\n';
    out.write(response.data(), static_cast<std::streamsize>(response.size()));
    out.flush();
    if (!out) throw CacheError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw CacheError("cannot commit cache entry '" + final_path.string() + "'");
  }
}

CacheStats ResponseCache::stats() const {
  CacheStats s;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (!name.empty() && name.front() == '.') continue;
    ++s.entries;
    s.bytes += entry.file_size();
  }
  if (ec) throw CacheError("cannot list '" + dir_.string() + "': " + ec.message());
  return s;
}

void ResponseCache::clear() {
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    if (entry.is_regular_file()) fs::remove(entry.path(), ec);
  }
  if (ec) throw CacheError("cannot clear '" + dir_.string() + "': " + ec.message());
}

std::string cached_complete(ResponseCache* cache, Backend& backend, const BackendRequest& request,
                            const std::function<void(const std::string&)>& warn) {
  const std::string key = request.hash();
  if (cache != nullptr) {
    try {
      if (auto hit = cache->lookup(key)) return *hit;
    } catch (const CacheError& e) {
      if (warn) warn(e.what());
    }
  }
  std::string response = backend.complete(request);
  if (cache != nullptr) {
    try {
      cache->store(key, response);
    } catch (const CacheError& e) {
      if (warn) warn(e.what());
    }
  }
  return response;
}

}  // namespace flows
