#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "flows/value.hpp"

namespace flows {

class TemplateError : public std::runtime_error {
 public:
  TemplateError(std::string placeholder, const std::string& message)
      : std::runtime_error(message), placeholder_(std::move(placeholder)) {}
  const std::string& placeholder() const noexcept { return placeholder_; }

 private:
  std::string placeholder_;
};

/// Replaces every "{{name}}" with the text form of vars[name] in a single
/// pass (substituted text is never re-scanned). No expression language.
/// Throws TemplateError for unresolved names and map-valued variables.
std::string render_template(std::string_view tmpl, const Payload& vars);

/// Names referenced by "{{name}}" placeholders, in order of appearance.
std::vector<std::string> template_placeholders(std::string_view tmpl);

}  // namespace flows
