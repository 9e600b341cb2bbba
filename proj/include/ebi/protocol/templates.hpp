#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ebi/core/dataset.hpp"
#include "ebi/core/specs.hpp"

namespace ebi::protocol {

// Text fields a dataset kind feeds into prompts. Empty = every text field.
struct KindFields {
  std::vector<std::string> a;
  std::vector<std::string> b;
};

// Prompt templates on disk. BI prompts are t{ptype}_{variant}_{kind}_{lang}.txt,
// sequential ones {name}_{kind}_{lang}.txt; a missing kind falls back to
// "generic" in the same language. Field lists per kind come from kinds.json.
class TemplateStore {
 public:
  explicit TemplateStore(std::filesystem::path dir);
  // The templates/ directory of this source tree.
  static const TemplateStore& builtin();

  const std::filesystem::path& dir() const { return dir_; }
  std::string bi(int ptype, PromptVariant variant, const std::string& kind, const std::string& lang) const;
  std::string named(const std::string& name, const std::string& kind, const std::string& lang) const;
  KindFields fields(const std::string& kind) const;

 private:
  std::string load(const std::string& stem, const std::string& kind, const std::string& lang) const;

  std::filesystem::path dir_;
  std::map<std::string, KindFields> kinds_;
};

// Replaces every {slot} (lower-case letters and '_'). A slot with no value is
// an error; braces around anything else are left alone.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& slots);

std::string id_list(const std::vector<IdA>& ids);
std::string id_list(const std::vector<IdB>& ids);

// One "id_A:<n>, <text>" line per record. Embedded newlines are flattened so
// each record stays on its own line.
std::string format_rows(const std::vector<const ProfileRecord*>& records, const char* id_label,
                        const std::vector<std::string>& fields);

struct PromptSide {
  std::vector<const ProfileRecord*> a;
  std::vector<const ProfileRecord*> b;
};

std::string render_prompt(const TemplateStore& store, const PromptProtocol& proto, const PromptSide& block,
                          const std::string& kind, const std::string& lang);

}  // namespace ebi::protocol
