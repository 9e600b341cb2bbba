#include "ebi/protocol/templates.hpp"

#include "json.hpp"
#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"

#ifndef EBI_TEMPLATE_DIR
#define EBI_TEMPLATE_DIR "templates"
#endif

namespace ebi::protocol {

namespace fs = std::filesystem;

TemplateStore::TemplateStore(fs::path dir) : dir_(std::move(dir)) {
  const auto kinds_path = dir_ / "kinds.json";
  if (!fs::exists(kinds_path)) throw IoError("template directory lacks kinds.json: " + dir_.string());
  try {
    const auto j = nlohmann::json::parse(read_file(kinds_path));
    for (const auto& [kind, spec] : j.items()) {
      kinds_[kind] = KindFields{spec.value("a", std::vector<std::string>{}),
                                spec.value("b", std::vector<std::string>{})};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid kinds.json: " + std::string(e.what()));
  }
}

const TemplateStore& TemplateStore::builtin() {
  static const TemplateStore store{fs::path(EBI_TEMPLATE_DIR)};
  return store;
}

std::string TemplateStore::load(const std::string& stem, const std::string& kind, const std::string& lang) const {
  for (const auto& k : {kind, std::string("generic")}) {
    const auto path = dir_ / (stem + "_" + k + "_" + lang + ".txt");
    if (fs::exists(path)) return read_file(path);
  }
  throw ValidationError("missing template " + stem + "_" + kind + "_" + lang + ".txt in " + dir_.string());
}

std::string TemplateStore::bi(int ptype, PromptVariant variant, const std::string& kind,
                              const std::string& lang) const {
  const std::string stem =
      "t" + std::to_string(ptype) + (variant == PromptVariant::starred ? "_starred" : "_plain");
  return load(stem, kind, lang);
}

std::string TemplateStore::named(const std::string& name, const std::string& kind, const std::string& lang) const {
  return load(name, kind, lang);
}

KindFields TemplateStore::fields(const std::string& kind) const {
  auto it = kinds_.find(kind);
  if (it == kinds_.end()) throw ValidationError("unknown dataset kind '" + kind + "'");
  return it->second;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const char ch = tmpl[pos];
    if (ch == '{') {
      std::size_t end = pos + 1;
      while (end < tmpl.size() && ((tmpl[end] >= 'a' && tmpl[end] <= 'z') || tmpl[end] == '_')) ++end;
      if (end > pos + 1 && end < tmpl.size() && tmpl[end] == '}') {
        const std::string name(tmpl.substr(pos + 1, end - pos - 1));
        auto it = slots.find(name);
        if (it == slots.end()) throw ValidationError("template slot {" + name + "} has no value");
        out += it->second;
        pos = end + 1;
        continue;
      }
    }
    out += ch;
    ++pos;
  }
  return out;
}

namespace {

template <class Id>
std::string list_of(const std::vector<Id>& ids) {
  std::string s = "[";
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) s += ", ";
    s += to_string(ids[k]);
  }
  return s + "]";
}

std::string flatten(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (char ch : text) s += (ch == '\n' || ch == '\r') ? ' ' : ch;
  return s;
}

}  // namespace

std::string id_list(const std::vector<IdA>& ids) { return list_of(ids); }
std::string id_list(const std::vector<IdB>& ids) { return list_of(ids); }

std::string format_rows(const std::vector<const ProfileRecord*>& records, const char* id_label,
                        const std::vector<std::string>& fields) {
  std::string out;
  for (const auto* r : records) {
    out += id_label;
    out += ':';
    out += std::to_string(r->id);
    if (fields.empty()) {
      for (const auto& [name, text] : r->texts) {
        if (text.empty()) continue;
        out += r->texts.size() > 1 ? ", " + name + ": " : ", ";
        out += flatten(text);
      }
    } else {
      for (const auto& f : fields) {
        const auto* text = r->text(f);
        if (!text || text->empty()) {
          throw ValidationError(std::string(id_label) + " " + std::to_string(r->id) +
                                " lacks required text field '" + f + "'");
        }
        out += fields.size() > 1 ? ", " + f + ": " : ", ";
        out += flatten(*text);
      }
    }
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string render_prompt(const TemplateStore& store, const PromptProtocol& proto, const PromptSide& block,
                          const std::string& kind, const std::string& lang) {
  if (block.a.empty()) throw ValidationError("prompt block has no candidates");
  if (block.b.empty()) throw ValidationError("prompt block has no targets");
  if (static_cast<int>(block.a.size()) > proto.block_size) {
    throw ValidationError("prompt block larger than block_size");
  }
  const auto fields = store.fields(kind);
  const auto tmpl = store.bi(proto.ptype, proto.variant, kind, lang);
  return render(tmpl, {{"rows_a", format_rows(block.a, "id_A", fields.a)},
                       {"rows_b", format_rows(block.b, "id_B", fields.b)},
                       {"block_size", std::to_string(block.a.size())},
                       {"n_targets", std::to_string(block.b.size())}});
}

}  // namespace ebi::protocol
