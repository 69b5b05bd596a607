#include "dcreact/study_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace dcreact {

namespace {

class Parser {
 public:
  Parser(const std::string& text) : text_(text) {}

  TomlTable parse() {
    TomlTable out;
    std::string table;
    while (true) {
      skip_blank_lines();
      if (pos_ >= text_.size()) break;
      if (peek() == '[') {
        ++pos_;
        table = bare_key();
        skip_inline_space();
        expect(']');
        end_of_line();
        continue;
      }
      const std::string key = bare_key();
      skip_inline_space();
      expect('=');
      skip_inline_space();
      const std::string full = table.empty() ? key : table + "." + key;
      if (out.contains(full)) fail("duplicate key '" + full + "'");
      out[full] = value();
      end_of_line();
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line()) + ": " + what);
  }

  int line() const {
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos_), '\n'));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_inline_space() {
    while (peek() == ' ' || peek() == '\t') ++pos_;
  }

  void skip_comment() {
    if (peek() == '#')
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

  void skip_blank_lines() {
    while (pos_ < text_.size()) {
      skip_inline_space();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() != '\n') return;
      ++pos_;
    }
  }

  void skip_space_and_newlines() {
    while (true) {
      skip_inline_space();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_inline_space();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (pos_ < text_.size() && peek() != '\n') fail("unexpected trailing characters");
    if (pos_ < text_.size()) ++pos_;
  }

  std::string bare_key() {
    skip_inline_space();
    const std::size_t start = pos_;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-') ++pos_;
    if (pos_ == start) fail("expected a key");
    return text_.substr(start, pos_ - start);
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (pos_ >= text_.size() || peek() == '\n') fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      const char e = text_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }

  TomlScalar scalar() {
    if (peek() == '"') return basic_string();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' &&
           peek() != ']' && peek() != '#')
      ++pos_;
    std::string tok = text_.substr(start, pos_ - start);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::erase(tok, '_');
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "nan";
    if (!is_float) {
      long long v = 0;
      const char* first = tok.data() + (tok.front() == '+' ? 1 : 0);
      const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("invalid integer '" + tok + "'");
      return v;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("invalid number '" + tok + "'");
    }
    if (used != tok.size()) fail("invalid number '" + tok + "'");
    return v;
  }

  TomlValue value() {
    if (peek() != '[') return std::visit([](auto&& v) -> TomlValue { return v; }, scalar());
    ++pos_;
    std::vector<TomlScalar> items;
    while (true) {
      skip_space_and_newlines();
      if (peek() == ']') {
        ++pos_;
        return items;
      }
      if (peek() == '[') fail("nested arrays are not supported");
      items.push_back(scalar());
      skip_space_and_newlines();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

std::string as_string(const TomlValue& v, const std::string& key) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError("'" + key + "' must be a string");
}

long long as_int(const TomlValue& v, const std::string& key) {
  if (const auto* i = std::get_if<long long>(&v)) return *i;
  throw ConfigError("'" + key + "' must be an integer");
}

double as_double(const TomlValue& v, const std::string& key) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
  throw ConfigError("'" + key + "' must be a number");
}

std::vector<int> as_int_list(const TomlValue& v, const std::string& key) {
  const auto* arr = std::get_if<std::vector<TomlScalar>>(&v);
  if (arr == nullptr) throw ConfigError("'" + key + "' must be an array of integers");
  std::vector<int> out;
  for (const auto& item : *arr) {
    const auto* i = std::get_if<long long>(&item);
    if (i == nullptr) throw ConfigError("'" + key + "' must be an array of integers");
    out.push_back(static_cast<int>(*i));
  }
  return out;
}

}  // namespace

TomlTable parse_toml(const std::string& text) { return Parser(text).parse(); }

StudyConfig study_config_from_toml(const std::string& text, const std::filesystem::path& base_dir) {
  const TomlTable t = parse_toml(text);
  static const std::set<std::string> known = {
      "problem",          "orders",          "N",           "n_cells",        "T",
      "threads",          "cache_dir",       "reference.kind", "reference.order", "reference.N",
      "newton.abs_tol",   "newton.rel_tol",  "newton.max_iter", "newton.max_halvings", "newton.damping",
      "output.csv",       "output.json",     "output.markdown"};
  for (const auto& [key, _] : t)
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "'");

  auto path_of = [&](const std::string& key) {
    std::filesystem::path p = as_string(t.at(key), key);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };

  StudyConfig cfg;
  if (!t.contains("problem")) throw ConfigError("missing key 'problem'");
  cfg.problem = as_string(t.at("problem"), "problem");
  if (!t.contains("orders")) throw ConfigError("missing key 'orders'");
  cfg.orders = as_int_list(t.at("orders"), "orders");
  if (!t.contains("N")) throw ConfigError("missing key 'N'");
  cfg.N_list = as_int_list(t.at("N"), "N");
  if (t.contains("n_cells")) cfg.n_cells = static_cast<int>(as_int(t.at("n_cells"), "n_cells"));
  if (t.contains("T")) cfg.T = as_double(t.at("T"), "T");
  if (t.contains("threads")) cfg.threads = static_cast<int>(as_int(t.at("threads"), "threads"));
  if (t.contains("cache_dir")) cfg.cache_dir = path_of("cache_dir");

  const std::string kind = t.contains("reference.kind") ? as_string(t.at("reference.kind"), "reference.kind") : "exact";
  if (kind == "dc") {
    if (!t.contains("reference.order") || !t.contains("reference.N"))
      throw ConfigError("a dc reference needs reference.order and reference.N");
    cfg.reference = ReferenceSpec::dc(static_cast<int>(as_int(t.at("reference.order"), "reference.order")),
                                      static_cast<int>(as_int(t.at("reference.N"), "reference.N")));
  } else if (kind == "exact") {
    if (t.contains("reference.order") || t.contains("reference.N"))
      throw ConfigError("reference.order and reference.N only apply to a dc reference");
    cfg.reference = ReferenceSpec::exact();
  } else {
    throw ConfigError("reference.kind must be \"exact\" or \"dc\"");
  }

  if (t.contains("newton.abs_tol")) cfg.newton.abs_tol = as_double(t.at("newton.abs_tol"), "newton.abs_tol");
  if (t.contains("newton.rel_tol")) cfg.newton.rel_tol = as_double(t.at("newton.rel_tol"), "newton.rel_tol");
  if (t.contains("newton.max_iter"))
    cfg.newton.max_iter = static_cast<int>(as_int(t.at("newton.max_iter"), "newton.max_iter"));
  if (t.contains("newton.max_halvings"))
    cfg.newton.max_halvings = static_cast<int>(as_int(t.at("newton.max_halvings"), "newton.max_halvings"));
  if (t.contains("newton.damping")) {
    const std::string d = as_string(t.at("newton.damping"), "newton.damping");
    if (d == "halving") {
      cfg.newton.damping = Damping::Halving;
    } else if (d == "none") {
      cfg.newton.damping = Damping::None;
    } else {
      throw ConfigError("newton.damping must be \"halving\" or \"none\"");
    }
  }

  if (t.contains("output.csv")) cfg.outputs.csv = path_of("output.csv");
  if (t.contains("output.json")) cfg.outputs.json = path_of("output.json");
  if (t.contains("output.markdown")) cfg.outputs.markdown = path_of("output.markdown");

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return study_config_from_toml(buf.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace dcreact
