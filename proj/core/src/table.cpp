#include "flows/table.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace flows {

const SolveRate* RateTable::find(const std::string& variant, std::size_t column) const {
  const auto it = cells.find({variant, column});
  return it == cells.end() ? nullptr : &it->second;
}

std::string baseline_cell(const SolveRate& rate) { return fmt::format("{:.1f} ±{:.1f}", rate.point, rate.half_width()); }

std::string delta_cell(const SolveRate& rate, const SolveRate& baseline) {
  std::string delta = fmt::format("{:+.1f}", rate.point - baseline.point);
  if (delta == "-0.0") delta = "+0.0";
  return fmt::format("{} ±{:.1f}", delta, rate.half_width());
}

namespace {

std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80 ? 1 : 0;
  return w;
}

std::string pad(const std::string& s, std::size_t width) { return s + std::string(width - display_width(s), ' '); }

std::vector<std::vector<std::string>> cell_grid(const RateTable& table, const std::string& baseline) {
  if (std::find(table.variants.begin(), table.variants.end(), baseline) == table.variants.end()) {
    throw TableError("baseline variant '" + baseline + "' is not in the table");
  }
  std::vector<std::vector<std::string>> grid;
  for (const auto& v : table.variants) {
    std::vector<std::string> row;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const SolveRate* rate = table.find(v, c);
      const SolveRate* base = table.find(baseline, c);
      if (rate != nullptr && base == nullptr) {
        throw TableError("baseline '" + baseline + "' has no result for column '" + table.columns[c].name + "'");
      }
      if (rate == nullptr) {
        row.emplace_back(kAbsentCell);
      } else if (v == baseline) {
        row.push_back(baseline_cell(*rate));
      } else {
        row.push_back(delta_cell(*rate, *base));
      }
    }
    grid.push_back(std::move(row));
  }
  return grid;
}

}  // namespace

std::string render_results_table(const RateTable& table, const std::string& baseline) {
  const auto grid = cell_grid(table, baseline);
  const bool grouped = std::any_of(table.columns.begin(), table.columns.end(),
                                   [](const TableColumn& c) { return !c.group.empty(); });

  std::size_t first = display_width(std::string("Variant"));
  for (const auto& v : table.variants) first = std::max(first, display_width(v));
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::size_t w = display_width(table.columns[c].name);
    for (const auto& row : grid) w = std::max(w, display_width(row[c]));
    widths.push_back(w);
  }
  // A group label must fit across its columns.
  for (std::size_t c = 0; grouped && c < table.columns.size();) {
    std::size_t end = c;
    while (end < table.columns.size() && table.columns[end].group == table.columns[c].group) ++end;
    std::size_t span = 0;
    for (std::size_t k = c; k < end; ++k) span += widths[k] + (k > c ? 2 : 0);
    const std::size_t need = display_width(table.columns[c].group);
    if (need > span) widths[end - 1] += need - span;
    c = end;
  }

  auto line = [&](const std::string& head, const std::vector<std::string>& cells) {
    std::string out = pad(head, first);
    for (std::size_t c = 0; c < cells.size(); ++c) out += "  " + pad(cells[c], widths[c]);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };

  std::string out;
  if (grouped) {
    std::string g = std::string(first, ' ');
    for (std::size_t c = 0; c < table.columns.size();) {
      std::size_t end = c;
      std::size_t span = 0;
      while (end < table.columns.size() && table.columns[end].group == table.columns[c].group) {
        span += widths[end] + (end > c ? 2 : 0);
        ++end;
      }
      g += "  " + pad(table.columns[c].group, span);
      c = end;
    }
    while (!g.empty() && g.back() == ' ') g.pop_back();
    out += g + "\n";
  }
  std::vector<std::string> names;
  for (const auto& c : table.columns) names.push_back(c.name);
  out += line("Variant", names);
  std::size_t total = first;
  for (auto w : widths) total += 2 + w;
  out += std::string(total, '-') + "\n";
  for (std::size_t r = 0; r < grid.size(); ++r) out += line(table.variants[r], grid[r]);
  return out;
}

std::string render_results_csv(const RateTable& table, const std::string& baseline) {
  const auto grid = cell_grid(table, baseline);
  std::string out = "variant,group,column,n,point,ci_low,ci_high,cell\n";
  for (std::size_t r = 0; r < table.variants.size(); ++r) {
    const auto& v = table.variants[r];
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const SolveRate* rate = table.find(v, c);
      out += v + ',' + table.columns[c].group + ',' + table.columns[c].name + ',';
      if (rate != nullptr) {
        out += std::to_string(rate->n) + ',' + shortest_number(rate->point) + ',' + shortest_number(rate->ci_low) +
               ',' + shortest_number(rate->ci_high);
      } else {
        out += ",,,";
      }
      out += ',' + grid[r][c] + '\n';
    }
  }
  return out;
}

namespace {

std::string source_column(const RunRecord& r) {
  if (r.source == "leetcode") return "LeetCode " + r.difficulty;
  if (r.source == "codeforces") return "Codeforces";
  return r.source;
}

int source_rank(const std::string& name) {
  if (name == "Codeforces") return 0;
  if (name == "LeetCode easy") return 1;
  if (name == "LeetCode medium") return 2;
  if (name == "LeetCode hard") return 3;
  return 4;
}

}  // namespace

RateTable rates_from_records(const std::vector<RunRecord>& records, const std::vector<std::string>& variants,
                             std::optional<Date> cutoff, std::uint64_t seed) {
  RateTable t;
  t.variants = variants;
  std::set<std::string> names;
  for (const auto& r : records) names.insert(source_column(r));
  std::vector<std::string> ordered(names.begin(), names.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const std::string& a, const std::string& b) { return source_rank(a) < source_rank(b); });
  const std::vector<std::string> groups = cutoff ? std::vector<std::string>{"Pre-cutoff", "Post-cutoff"}
                                                 : std::vector<std::string>{""};
  for (const auto& g : groups) {
    for (const auto& n : ordered) t.columns.push_back({g, n});
  }
  std::map<std::pair<std::string, std::size_t>, std::vector<bool>> outcomes;
  for (const auto& r : records) {
    std::size_t group = 0;
    if (cutoff && !(r.release_date < *cutoff)) group = 1;
    const auto pos = static_cast<std::size_t>(std::find(ordered.begin(), ordered.end(), source_column(r)) - ordered.begin());
    outcomes[{r.variant, group * ordered.size() + pos}].push_back(r.solved);
  }
  for (const auto& [key, o] : outcomes) {
    if (std::find(variants.begin(), variants.end(), key.first) == variants.end()) continue;
    t.cells.emplace(key, solve_rate(o, kDefaultResamples, kDefaultLevel, seed));
  }
  return t;
}

}  // namespace flows
