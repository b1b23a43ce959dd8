#include "flows/template.hpp"

#include <vector>

namespace flows {
namespace {

template <class OnText, class OnName>
void scan(std::string_view tmpl, OnText on_text, OnName on_name) {
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    const auto name = tmpl.substr(open + 2, close - open - 2);
    if (name.empty() || name.find('{') != std::string_view::npos) {
      // Not a placeholder; emit the opening brace and keep scanning after it.
      on_text(tmpl.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    on_text(tmpl.substr(pos, open - pos));
    on_name(name);
    pos = close + 2;
  }
  on_text(tmpl.substr(pos));
}

}  // namespace

std::string render_template(std::string_view tmpl, const Payload& vars) {
  std::string out;
  out.reserve(tmpl.size());
  scan(
      tmpl, [&](std::string_view text) { out.append(text); },
      [&](std::string_view name) {
        const auto it = vars.find(name);
        if (it == vars.end()) {
          throw TemplateError(std::string(name), "unresolved placeholder '{{" + std::string(name) + "}}'");
        }
        try {
          out += text_form(it->second);
        } catch (const std::invalid_argument& e) {
          throw TemplateError(std::string(name), "placeholder '" + std::string(name) + "': " + e.what());
        }
      });
  return out;
}

std::vector<std::string> template_placeholders(std::string_view tmpl) {
  std::vector<std::string> names;
  scan(tmpl, [](std::string_view) {}, [&](std::string_view name) { names.emplace_back(name); });
  return names;
}

}  // namespace flows
