#include "crystaframe/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "crystaframe/nabla.hpp"
#include "json.hpp"

namespace crystaframe {

ScenarioError::ScenarioError(Kind kind, int line, int column, const std::string& msg)
    : std::runtime_error(msg), kind_(kind), line_(line), column_(column) {}

const Entry* Section::find(const std::string& key) const {
  for (const auto& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

namespace {

[[noreturn]] void parse_error(int line, int col, const std::string& msg) {
  throw ScenarioError(ScenarioError::Kind::Parse, line, col, msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int leading(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  return b == std::string::npos ? 0 : static_cast<int>(b);
}

i64 parse_int(const std::string& s, int line, int col) {
  i64 v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) parse_error(line, col, "expected an integer, got '" + s + "'");
  return v;
}

const std::set<std::string> kSectionKinds = {"budgets", "algebra", "frame", "hom", "window", "commands"};
const std::set<std::string> kNamed = {"algebra", "frame", "hom", "window"};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source, const Budgets& defaults) {
  Scenario sc;
  sc.source = source;
  sc.budgets = defaults;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  Section* cur = nullptr;
  std::map<std::string, int> header_seen;
  std::set<std::pair<std::string, std::string>> names;
  bool have_budgets = false, have_commands = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    if (trim(line).empty()) continue;
    const int indent = leading(line);
    const std::string body = trim(line);
    if (body.front() == '[') {
      if (body.back() != ']') parse_error(lineno, indent + 1, "unterminated section header");
      std::istringstream hs(body.substr(1, body.size() - 2));
      std::string kind, name, extra;
      hs >> kind >> name >> extra;
      if (!kSectionKinds.count(kind)) parse_error(lineno, indent + 2, "unknown section '" + kind + "'");
      if (kNamed.count(kind) && name.empty()) parse_error(lineno, indent + 2, "section [" + kind + "] needs a name");
      if (!kNamed.count(kind) && !name.empty()) parse_error(lineno, indent + 2, "section [" + kind + "] takes no name");
      if (!extra.empty()) parse_error(lineno, indent + 2, "unexpected text in section header");
      if (kind == "budgets" && have_budgets) parse_error(lineno, indent + 1, "duplicate [budgets]");
      if (kind == "commands" && have_commands) parse_error(lineno, indent + 1, "duplicate [commands]");
      if (kNamed.count(kind) && !names.insert({kind, name}).second)
        parse_error(lineno, indent + 1, "duplicate " + kind + " '" + name + "'");
      have_budgets = have_budgets || kind == "budgets";
      have_commands = have_commands || kind == "commands";
      sc.sections.push_back(Section{kind, name, lineno, {}});
      cur = &sc.sections.back();
      continue;
    }
    if (cur && cur->kind == "commands") {
      const auto sp = body.find_first_of(" \t");
      Entry e{body.substr(0, sp), sp == std::string::npos ? "" : trim(body.substr(sp)), lineno, indent + 1};
      cur->entries.push_back(e);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_error(lineno, indent + 1, "expected 'key = value'");
    Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno, leading(line.substr(eq + 1)) + static_cast<int>(eq) + 2};
    if (e.key.empty()) parse_error(lineno, indent + 1, "missing key");
    if (e.value.empty()) parse_error(lineno, static_cast<int>(eq) + 2, "missing value for '" + e.key + "'");
    if (!cur) {
      if (header_seen.count(e.key)) parse_error(lineno, indent + 1, "duplicate '" + e.key + "'");
      header_seen[e.key] = lineno;
      sc.field_lines[e.key] = lineno;
      if (e.key == "format_version") {
        sc.format_version = static_cast<int>(parse_int(e.value, lineno, e.column));
        if (sc.format_version != kScenarioFormatVersion)
          parse_error(lineno, e.column, "unsupported format_version " + e.value);
      } else if (e.key == "p") {
        sc.p = parse_int(e.value, lineno, e.column);
      } else if (e.key == "precision") {
        sc.precision = static_cast<int>(parse_int(e.value, lineno, e.column));
      } else if (e.key == "depth") {
        sc.depth = static_cast<int>(parse_int(e.value, lineno, e.column));
      } else {
        parse_error(lineno, indent + 1, "unknown field '" + e.key + "'");
      }
      continue;
    }
    if (cur->find(e.key)) parse_error(lineno, indent + 1, "duplicate key '" + e.key + "'");
    if (cur->kind == "budgets") {
      const bool dflt = e.value == "default";
      if (e.key == "max_carrier_size") {
        if (!dflt) sc.budgets.max_carrier_size = parse_int(e.value, lineno, e.column);
      } else if (e.key == "max_enumeration") {
        if (!dflt) sc.budgets.max_enumeration = parse_int(e.value, lineno, e.column);
      } else if (e.key == "max_cap") {
        if (!dflt) sc.budgets.max_cap = static_cast<int>(parse_int(e.value, lineno, e.column));
      } else {
        parse_error(lineno, indent + 1, "unknown budget '" + e.key + "'");
      }
    }
    cur->entries.push_back(e);
  }
  const int eof = lineno + 1;
  if (!header_seen.count("format_version")) parse_error(1, 1, "missing format_version");
  if (!header_seen.count("p")) parse_error(1, 1, "missing p");
  if (!header_seen.count("precision")) parse_error(1, 1, "missing precision");
  if (!have_budgets) parse_error(eof, 1, "missing [budgets] section");
  for (const auto& s : sc.sections)
    if (s.kind == "budgets")
      for (const char* k : {"max_carrier_size", "max_enumeration", "max_cap"})
        if (!s.find(k)) parse_error(s.line, 1, std::string("[budgets] lacks ") + k);
  if (!have_commands) parse_error(eof, 1, "missing [commands] section");
  return sc;
}

Scenario load_scenario(const std::string& path, const Budgets& defaults) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), path, defaults);
}

// ------------------------------------------------------------------ declarations

namespace {

[[noreturn]] void semantic_error(int line, int col, const std::string& msg) {
  throw ScenarioError(ScenarioError::Kind::Semantic, line, col, msg);
}
[[noreturn]] void semantic_error(const Entry& e, const std::string& msg) { semantic_error(e.line, e.column, msg); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

i64 entry_int(const Entry& e) {
  i64 v = 0;
  auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) semantic_error(e, "expected an integer for '" + e.key + "'");
  return v;
}

struct Env {
  const Scenario& sc;
  int precision;  // working precision for lift and pd frames
  std::map<std::string, AlgebraPtr> algebras;
  std::map<std::string, FramePtr> frames;
  std::map<std::string, PDPtr> envelopes;
  std::map<std::string, FrameHom> homs;
  std::map<std::string, Window> windows;

  const Entry& need(const Section& s, const std::string& key) const {
    const Entry* e = s.find(key);
    if (!e) semantic_error(s.line, 1, "[" + s.kind + " " + s.name + "] lacks '" + key + "'");
    return *e;
  }
  template <class M>
  const typename M::mapped_type& lookup(const M& m, const Entry& e, const std::string& what) const {
    auto it = m.find(e.value);
    if (it == m.end()) semantic_error(e, "unknown " + what + " '" + e.value + "'");
    return it->second;
  }
};

const std::set<std::string>& allowed_keys(const std::string& kind) {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"algebra", {"field", "vars", "depth"}},
      {"frame", {"kind", "algebra", "length", "precision", "vars", "generators", "cap", "ideal"}},
      {"hom", {"kind", "source", "target", "frame"}},
      {"window", {"frame", "d", "t", "psi"}},
  };
  return keys.at(kind);
}

/// "x^3" -> (x, 3); "x" -> (x, nullopt)
std::pair<std::string, std::optional<int>> var_spec(const Entry& e, const std::string& s) {
  const auto caret = s.find('^');
  if (caret == std::string::npos) return {s, std::nullopt};
  Entry tmp = e;
  tmp.value = s.substr(caret + 1);
  return {s.substr(0, caret), static_cast<int>(entry_int(tmp))};
}

AlgebraPtr build_algebra(Env& env, const Section& s) {
  const i64 p = env.sc.p;
  CoeffField field = CoeffField::residue(p, 1);
  if (const Entry* f = s.find("field")) {
    auto words = split(f->value, ' ');
    words.erase(std::remove(words.begin(), words.end(), ""), words.end());
    if (words.empty()) semantic_error(*f, "empty field");
    if (words[0] == "prime" && words.size() == 1) {
    } else if (words[0] == "residue" && words.size() == 2) {
      Entry tmp = *f;
      tmp.value = words[1];
      field = CoeffField::residue(p, static_cast<int>(entry_int(tmp)));
    } else if (words[0] == "extension" && words.size() >= 3) {
      std::vector<i64> poly;
      for (size_t i = 1; i < words.size(); ++i) {
        Entry tmp = *f;
        tmp.value = words[i];
        poly.push_back(entry_int(tmp));
      }
      field = CoeffField::extension(p, poly);
    } else {
      semantic_error(*f, "field must be 'prime', 'residue <m>' or 'extension <c0> ... <ck>'");
    }
  }
  std::vector<VariableSpec> vars;
  if (const Entry* v = s.find("vars"))
    for (const auto& item : split(v->value, ',')) {
      auto [name, cap] = var_spec(*v, item);
      if (name.empty()) semantic_error(*v, "empty variable name");
      vars.push_back(VariableSpec{name, 0, cap});
    }
  if (const Entry* d = s.find("depth"))
    for (const auto& item : split(d->value, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) semantic_error(*d, "depth entries are 'var:depth'");
      Entry tmp = *d;
      tmp.value = trim(item.substr(colon + 1));
      const int depth = static_cast<int>(entry_int(tmp));
      if (depth > env.sc.depth) throw BudgetExceeded("perfection depth " + std::to_string(depth) + " exceeds the scenario depth");
      auto it = std::find_if(vars.begin(), vars.end(), [&](const VariableSpec& vs) { return vs.name == trim(item.substr(0, colon)); });
      if (it == vars.end()) semantic_error(*d, "unknown variable in '" + item + "'");
      it->depth = depth;
      if (it->cap) *it->cap *= static_cast<int>(ipow(p, depth));
    }
  return MonomialAlgebra::create(field, vars);
}

/// "x^2*y" or "x^1/2" over the variables of an algebra (numerators over p^depth).
Monomial parse_algebra_monomial(const MonomialAlgebra& a, const Entry& e, const std::string& text) {
  Monomial mono(a.variables().size(), 0);
  for (const auto& f : split(text, '*')) {
    auto [name, expo_text] = std::pair{f.substr(0, f.find('^')), f.find('^') == std::string::npos ? std::string("1") : f.substr(f.find('^') + 1)};
    size_t idx = a.variables().size();
    for (size_t i = 0; i < a.variables().size(); ++i)
      if (a.variables()[i].name == name) idx = i;
    if (idx == a.variables().size()) semantic_error(e, "unknown variable '" + name + "'");
    i64 num = 0, den = 1;
    Entry tmp = e;
    const auto slash = expo_text.find('/');
    tmp.value = expo_text.substr(0, slash);
    num = entry_int(tmp);
    if (slash != std::string::npos) {
      tmp.value = expo_text.substr(slash + 1);
      den = entry_int(tmp);
    }
    const i64 scale = ipow(a.field().p(), a.variables()[idx].depth);
    if (den <= 0 || (num * scale) % den != 0) semantic_error(e, "exponent of '" + name + "' is not in the allowed lattice");
    mono[idx] += static_cast<int>(num * scale / den);
  }
  return mono;
}

PDPtr build_envelope(Env& env, const Section& s) {
  PDPresentation pr;
  pr.p = env.sc.p;
  pr.m = s.find("precision") ? static_cast<int>(entry_int(*s.find("precision"))) : env.precision;
  const Entry& vars = env.need(s, "vars");
  pr.vars = split(vars.value, ',');
  for (const auto& v : pr.vars)
    if (v.empty()) semantic_error(vars, "empty variable name");
  const Entry& gens = env.need(s, "generators");
  for (const auto& g : split(gens.value, ',')) {
    Monomial mono(pr.vars.size(), 0);
    for (const auto& f : split(g, '*')) {
      const auto caret = f.find('^');
      const std::string name = f.substr(0, caret);
      auto it = std::find(pr.vars.begin(), pr.vars.end(), name);
      if (it == pr.vars.end()) semantic_error(gens, "unknown variable '" + name + "'");
      Entry tmp = gens;
      tmp.value = caret == std::string::npos ? "1" : f.substr(caret + 1);
      mono[static_cast<size_t>(it - pr.vars.begin())] += static_cast<int>(entry_int(tmp));
    }
    pr.generators.push_back(mono);
  }
  const Entry& cap = env.need(s, "cap");
  pr.cap = static_cast<int>(entry_int(cap));
  if (pr.cap > env.sc.budgets.max_cap) throw BudgetExceeded("cap " + std::to_string(pr.cap) + " exceeds max_cap");
  if (pr.cap < 1 || pr.m < 1) semantic_error(cap, "cap and precision must be positive");
  return PDAlgebra::build(pr);
}

FramePtr build_frame(Env& env, const Section& s) {
  const Entry& kind = env.need(s, "kind");
  auto length = [&] {
    const Entry& e = env.need(s, "length");
    const i64 n = entry_int(e);
    if (n < 1) semantic_error(e, "length must be positive");
    return static_cast<int>(n);
  };
  if (kind.value == "witt") return witt_frame(env.lookup(env.algebras, env.need(s, "algebra"), "algebra"), length());
  if (kind.value == "witt-lift") return witt_lift_frame(env.lookup(env.algebras, env.need(s, "algebra"), "algebra"), length());
  if (kind.value == "lift") {
    const int m = s.find("precision") ? static_cast<int>(entry_int(*s.find("precision"))) : env.precision;
    if (m < 1) semantic_error(s.line, 1, "precision must be positive");
    return lift_frame(env.sc.p, m);
  }
  if (kind.value == "pd") {
    PDPtr d = build_envelope(env, s);
    env.envelopes[s.name] = d;
    return pd_frame(d);
  }
  if (kind.value == "quotient") {
    const Entry& alg = env.need(s, "algebra");
    AlgebraPtr a = env.lookup(env.algebras, alg, "algebra");
    const Entry& ideal = env.need(s, "ideal");
    std::vector<Monomial> j;
    for (const auto& g : split(ideal.value, ',')) j.push_back(parse_algebra_monomial(*a, ideal, g));
    const int n = length();
    return admissible_quotient_frame(minimal_sequence(a, j, n), n);
  }
  semantic_error(kind, "unknown frame kind '" + kind.value + "'");
}

FrameHom build_hom(Env& env, const Section& s) {
  const Entry& kind = env.need(s, "kind");
  if (kind.value == "identity") return identity_hom(env.lookup(env.frames, env.need(s, "frame"), "frame"));
  FramePtr src = env.lookup(env.frames, env.need(s, "source"), "frame");
  FramePtr tgt = env.lookup(env.frames, env.need(s, "target"), "frame");
  if (kind.value == "augmentation") return augmentation_hom(src, tgt);
  if (kind.value == "quotient-projection") return quotient_projection(src, tgt);
  semantic_error(kind, "unknown hom kind '" + kind.value + "'");
}

/// Integer combinations of products of x, x^n and x^[n] (PD frames only for
/// the latter two).
Elem parse_element(const Frame& f, const Entry& e, const std::string& text) {
  const Ring& r = f.target();
  const auto* d = dynamic_cast<const PDAlgebra*>(&r);
  Elem total = r.zero();
  std::string cur;
  std::vector<std::pair<int, std::string>> terms;
  int sign = 1;
  for (char ch : text + "+") {
    if ((ch == '+' || ch == '-') && !trim(cur).empty()) {
      terms.push_back({sign, trim(cur)});
      cur.clear();
      sign = ch == '-' ? -1 : 1;
    } else if ((ch == '+' || ch == '-') && trim(cur).empty()) {
      if (ch == '-') sign = -sign;
    } else {
      cur += ch;
    }
  }
  if (terms.empty()) semantic_error(e, "empty matrix entry");
  for (const auto& [sg, term] : terms) {
    Elem t = r.from_int(sg);
    for (const auto& factor : split(term, '*')) {
      if (factor.empty()) semantic_error(e, "malformed term '" + term + "'");
      if (std::isdigit(static_cast<unsigned char>(factor[0]))) {
        Entry tmp = e;
        tmp.value = factor;
        t = r.mul(t, r.from_int(entry_int(tmp)));
        continue;
      }
      if (!d) semantic_error(e, "symbolic entries need a pd frame: '" + factor + "'");
      const auto caret = factor.find('^');
      const std::string name = factor.substr(0, caret);
      const auto& vars = d->presentation().vars;
      auto it = std::find(vars.begin(), vars.end(), name);
      if (it == vars.end()) semantic_error(e, "unknown variable '" + name + "'");
      const size_t vi = static_cast<size_t>(it - vars.begin());
      std::string ex = caret == std::string::npos ? "1" : factor.substr(caret + 1);
      const bool divided = ex.size() > 2 && ex.front() == '[' && ex.back() == ']';
      Entry tmp = e;
      tmp.value = divided ? ex.substr(1, ex.size() - 2) : ex;
      const int n = static_cast<int>(entry_int(tmp));
      if (n < 0) semantic_error(e, "negative exponent in '" + factor + "'");
      Elem g;
      if (divided) {
        Monomial unit(vars.size(), 0);
        unit[vi] = 1;
        const auto& gens = d->presentation().generators;
        auto gj = std::find(gens.begin(), gens.end(), unit);
        if (gj == gens.end()) semantic_error(e, "'" + name + "' is not a divided-power generator");
        if (n >= d->cap()) semantic_error(e, "divided degree of '" + factor + "' reaches the cap");
        g = d->generator_power(static_cast<size_t>(gj - gens.begin()), n);
      } else {
        Monomial mono(vars.size(), 0);
        mono[vi] = n;
        g = d->monomial(mono);
      }
      t = r.mul(t, g);
    }
    total = r.add(total, t);
  }
  return total;
}

Window build_window(Env& env, const Section& s) {
  FramePtr f = env.lookup(env.frames, env.need(s, "frame"), "frame");
  const Entry& de = env.need(s, "d");
  const Entry& te = env.need(s, "t");
  const i64 d = entry_int(de), t = entry_int(te);
  if (d < 0 || t < 0) semantic_error(de, "d and t must be non-negative");
  const Entry& pe = env.need(s, "psi");
  const auto rows = split(pe.value, ';');
  const size_t r = static_cast<size_t>(d + t);
  if (rows.size() != r && !(r == 0 && pe.value == "-")) semantic_error(pe, "psi must have " + std::to_string(r) + " rows");
  EMat psi;
  for (size_t i = 0; i < r; ++i) {
    const auto cells = split(rows[i], ',');
    if (cells.size() != r) semantic_error(pe, "row " + std::to_string(i + 1) + " of psi must have " + std::to_string(r) + " entries");
    psi.emplace_back();
    for (const auto& c : cells) psi.back().push_back(parse_element(*f, pe, c));
  }
  return window_from_psi(f, static_cast<int>(d), static_cast<int>(t), psi);
}

void build_declarations(Env& env) {
  for (const auto& s : env.sc.sections) {
    if (s.kind == "budgets" || s.kind == "commands") continue;
    for (const auto& e : s.entries)
      if (!allowed_keys(s.kind).count(e.key)) semantic_error(e.line, 1, "unknown key '" + e.key + "' in [" + s.kind + "]");
    try {
      if (s.kind == "algebra") env.algebras[s.name] = build_algebra(env, s);
      if (s.kind == "frame") env.frames[s.name] = build_frame(env, s);
      if (s.kind == "hom") env.homs[s.name] = build_hom(env, s);
      if (s.kind == "window") env.windows.insert_or_assign(s.name, build_window(env, s));
    } catch (const AlgebraError& err) {
      semantic_error(s.line, 1, "[" + s.kind + " " + s.name + "]: " + err.what());
    } catch (const std::invalid_argument& err) {
      semantic_error(s.line, 1, "[" + s.kind + " " + s.name + "]: " + err.what());
    }
  }
}

// ------------------------------------------------------------------ commands

using Json = nlohmann::ordered_json;

struct Command {
  const Entry* entry = nullptr;
  std::string verb;
  std::string positional;
  std::map<std::string, std::string> args;
};

struct Outcome {
  std::string outcome = "pass";  // pass | fail | finding
  std::string summary;
  Json details = Json::object();
};

const std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>>& verbs() {
  // verb -> (required, optional)
  static const std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>> v = {
      {"validate", {{}, {"frame", "window", "hom"}}},
      {"classify", {{"frame", "rank"}, {"expect_classes"}}},
      {"fv", {{"window"}, {}}},
      {"hom", {{"source", "target"}, {"mode", "expect_log_size"}}},
      {"base-change", {{"hom", "window"}, {}}},
      {"lift", {{"hom", "source", "target"}, {}}},
      {"solve-connection", {{"window"}, {}}},
      {"torsion-probe", {{"frame"}, {}}},
      {"verify", {{}, {"p", "precision", "grid"}}},
  };
  return v;
}

Command parse_command(const Env& env, const Entry& e) {
  Command c;
  c.entry = &e;
  c.verb = e.key;
  auto spec = verbs().find(c.verb);
  if (spec == verbs().end()) semantic_error(e.line, e.column, "unknown command '" + c.verb + "'");
  std::istringstream in(e.value);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      if (c.verb != "verify" || !c.positional.empty()) semantic_error(e, "unexpected argument '" + tok + "'");
      c.positional = tok;
      continue;
    }
    const std::string k = tok.substr(0, eq);
    if (!spec->second.first.count(k) && !spec->second.second.count(k))
      semantic_error(e, "command '" + c.verb + "' takes no argument '" + k + "'");
    if (!c.args.emplace(k, tok.substr(eq + 1)).second) semantic_error(e, "duplicate argument '" + k + "'");
  }
  for (const auto& k : spec->second.first)
    if (!c.args.count(k)) semantic_error(e, "command '" + c.verb + "' needs " + k + "=");
  auto ref = [&](const std::string& key, const auto& table, const std::string& what) {
    auto it = c.args.find(key);
    if (it != c.args.end() && !table.count(it->second)) semantic_error(e, "unknown " + what + " '" + it->second + "'");
  };
  ref("frame", env.frames, "frame");
  ref("window", env.windows, "window");
  ref("hom", env.homs, "hom");
  if (c.verb == "hom" || c.verb == "lift") {
    ref("source", env.windows, "window");
    ref("target", env.windows, "window");
  }
  if (c.verb == "validate" && c.args.size() != 1) semantic_error(e, "validate needs exactly one of frame=, window=, hom=");
  if (c.verb == "verify") {
    const auto& tags = verify_tags();
    if (std::find(tags.begin(), tags.end(), c.positional) == tags.end())
      semantic_error(e, "unknown verify tag '" + c.positional + "'");
  }
  if (c.verb == "hom" && c.args.count("mode") && c.args["mode"] != "window" && c.args["mode"] != "phi")
    semantic_error(e, "mode must be 'window' or 'phi'");
  if (c.verb == "torsion-probe" && !env.envelopes.count(c.args["frame"])) semantic_error(e, "torsion-probe needs a pd frame");
  if (c.verb == "solve-connection" && env.windows.at(c.args["window"]).frame->kind() != FrameKind::PD)
    semantic_error(e, "solve-connection needs a window over a pd frame");
  return c;
}

i64 arg_int(const Command& c, const std::string& key) {
  Entry tmp = *c.entry;
  tmp.key = key;
  tmp.value = c.args.at(key);
  return entry_int(tmp);
}

void check_carrier(const Env& env, const Ring& r, const std::string& what) {
  auto n = r.cardinality();
  if (!n || *n > env.sc.budgets.max_carrier_size)
    throw BudgetExceeded(what + ": carrier " + r.describe() + " exceeds max_carrier_size");
}

Json certificate_json(const Certificate& c) {
  Json j = Json::object();
  j["checks"] = c.checks;
  j["failures"] = c.failures;
  return j;
}

Outcome cmd_validate(const Env& env, const Command& c) {
  Outcome o;
  const i64 limit = std::min<i64>(4096, env.sc.budgets.max_carrier_size);
  Certificate cert;
  if (c.args.count("frame")) {
    const FramePtr& f = env.frames.at(c.args.at("frame"));
    cert = validate_frame(*f, 64, 1, limit);
    o.details["frame"] = f->describe();
  } else if (c.args.count("window")) {
    const Window& w = env.windows.at(c.args.at("window"));
    cert = validate_window(w);
    o.details["window"] = c.args.at("window");
  } else {
    const FrameHom& h = env.homs.at(c.args.at("hom"));
    cert = validate_frame_hom(h, 64, 1, limit);
    o.details["hom"] = h.name;
  }
  o.details["certificate"] = certificate_json(cert);
  o.outcome = cert.ok ? "pass" : "fail";
  o.summary = std::to_string(cert.checks) + " checks" + (cert.ok ? "" : ", first failure: " + cert.failures.front());
  return o;
}

Outcome cmd_classify(const Env& env, const Command& c) {
  Outcome o;
  const FramePtr& f = env.frames.at(c.args.at("frame"));
  const i64 rank = arg_int(c, "rank");
  if (rank < 0 || rank > 2) semantic_error(*c.entry, "classify supports rank 0, 1 or 2");
  check_carrier(env, f->target(), "classify");
  ClassTable t = classify_windows(f, static_cast<int>(rank), env.sc.budgets.max_enumeration);
  o.details["frame"] = f->describe();
  o.details["rank"] = rank;
  o.details["enumerated"] = t.enumerated;
  Json classes = Json::array();
  for (const auto& k : t.classes) {
    Json row = Json::object();
    row["d"] = k.d;
    row["t"] = k.t;
    row["psi"] = mat_to_string(f->target(), k.psi);
    row["orbit_size"] = k.orbit_size;
    classes.push_back(row);
  }
  o.details["count"] = t.classes.size();
  o.details["classes"] = classes;
  o.summary = std::to_string(t.classes.size()) + " classes";
  if (c.args.count("expect_classes") && arg_int(c, "expect_classes") != static_cast<i64>(t.classes.size())) {
    o.outcome = "fail";
    o.summary += ", expected " + c.args.at("expect_classes");
  }
  return o;
}

Outcome cmd_fv(const Env& env, const Command& c) {
  Outcome o;
  const Window& w = env.windows.at(c.args.at("window"));
  FVOperators fv = fv_operators(w);
  o.details["F"] = mat_to_string(w.frame->target(), fv.f);
  o.details["V"] = mat_to_string(w.frame->target(), fv.v);
  o.details["VF_is_p"] = fv.vf_ok;
  o.details["FV_is_p"] = fv.fv_ok;
  o.outcome = fv.vf_ok && fv.fv_ok ? "pass" : "fail";
  o.summary = std::string("VF = p ") + (fv.vf_ok ? "yes" : "no") + ", FV = p " + (fv.fv_ok ? "yes" : "no");
  return o;
}

Outcome cmd_hom(const Env& env, const Command& c) {
  Outcome o;
  const Window& v = env.windows.at(c.args.at("source"));
  const Window& w = env.windows.at(c.args.at("target"));
  if (v.frame != w.frame) semantic_error(*c.entry, "source and target live over different frames");
  const bool phi = c.args.count("mode") && c.args.at("mode") == "phi";
  if (!v.frame->linear()) check_carrier(env, v.frame->carrier(), "hom");
  HomSpace hs = hom_space(v, w, phi ? HomMode::PhiModule : HomMode::Window, env.sc.budgets.max_enumeration);
  o.details["mode"] = phi ? "phi" : "window";
  o.details["log_p_size"] = hs.log_p_size;
  o.details["generators"] = hs.generators.size();
  o.details["exhaustive"] = hs.exhaustive;
  o.summary = "log_p |Hom| = " + std::to_string(hs.log_p_size);
  if (c.args.count("expect_log_size") && arg_int(c, "expect_log_size") != hs.log_p_size) {
    o.outcome = "fail";
    o.summary += ", expected " + c.args.at("expect_log_size");
  }
  return o;
}

Outcome cmd_base_change(const Env& env, const Command& c) {
  Outcome o;
  const FrameHom& h = env.homs.at(c.args.at("hom"));
  const Window& w = env.windows.at(c.args.at("window"));
  if (w.frame != h.source) semantic_error(*c.entry, "window does not live over the source of the hom");
  Window b = base_change(h, w);
  Certificate cert = validate_window(b);
  o.details["frame"] = b.frame->describe();
  o.details["d"] = b.d;
  o.details["t"] = b.t;
  o.details["psi"] = mat_to_string(b.frame->target(), b.psi);
  o.details["certificate"] = certificate_json(cert);
  o.outcome = cert.ok ? "pass" : "fail";
  o.summary = "Psi = " + mat_to_string(b.frame->target(), b.psi);
  return o;
}

Outcome cmd_lift(const Env& env, const Command& c) {
  Outcome o;
  const FrameHom& h = env.homs.at(c.args.at("hom"));
  const Window& v = env.windows.at(c.args.at("source"));
  const Window& w = env.windows.at(c.args.at("target"));
  if (v.frame != h.source || w.frame != h.source) semantic_error(*c.entry, "windows must live over the source of the hom");
  // section of alpha by enumeration of the source carrier
  const Ring& a = h.source->carrier();
  check_carrier(env, a, "lift");
  std::map<Elem, Elem> section;
  for (i64 i = 0; i < *a.cardinality(); ++i) {
    Elem x = a.element(i);
    section.emplace(h.alpha(x), x);
  }
  Window v2 = base_change(h, v), w2 = base_change(h, w);
  HomSpace hs = hom_space(v2, w2, HomMode::Window, env.sc.budgets.max_enumeration);
  const Frame& g = *h.target;
  HomMatrix zero;
  zero.g = mat_zero(g.carrier(), static_cast<size_t>(w2.rank()), static_cast<size_t>(v2.rank()));
  zero.witnesses.assign(static_cast<size_t>(w2.t), std::vector<Elem>(static_cast<size_t>(v2.d), g.normalize_witness(Vec(g.witness_width(), 0))));
  std::vector<HomMatrix> group{zero};
  std::set<EMat> seen{zero.g};
  for (size_t head = 0; head < group.size(); ++head)
    for (const auto& gen : hs.generators) {
      HomMatrix sum;
      sum.g = mat_add(g.carrier(), group[head].g, gen.g);
      sum.witnesses = group[head].witnesses;
      for (size_t i = 0; i < sum.witnesses.size(); ++i)
        for (size_t j = 0; j < sum.witnesses[i].size(); ++j)
          sum.witnesses[i][j] = g.witness_add(group[head].witnesses[i][j], gen.witnesses[i][j]);
      if (seen.insert(sum.g).second) {
        if (static_cast<i64>(group.size()) >= env.sc.budgets.max_enumeration) throw BudgetExceeded("lift: hom group exceeds max_enumeration");
        group.push_back(std::move(sum));
      }
    }
  i64 lifted = 0, unique = 0;
  int iterations = 0;
  Json failures = Json::array();
  for (const auto& t : group) {
    try {
      LiftedHom l = lift_hom(h, v, w, t, [&](const Elem& x) {
        auto it = section.find(x);
        if (it == section.end()) throw AlgebraError("lift: alpha is not surjective");
        return it->second;
      });
      ++lifted;
      if (l.unique) ++unique;
      iterations = std::max(iterations, l.iterations);
    } catch (const AlgebraError& e) {
      if (failures.size() < 5) failures.push_back(std::string(e.what()));
    }
  }
  const i64 n = static_cast<i64>(group.size());
  o.details["target_homs"] = n;
  o.details["lifted"] = lifted;
  o.details["unique"] = unique;
  o.details["max_iterations"] = iterations;
  o.details["failures"] = failures;
  o.outcome = lifted == n && unique == n ? "pass" : "fail";
  o.summary = std::to_string(lifted) + "/" + std::to_string(n) + " homs lifted, " + std::to_string(unique) + " uniquely";
  return o;
}

Outcome cmd_solve_connection(const Env& env, const Command& c) {
  Outcome o;
  const Window& w = env.windows.at(c.args.at("window"));
  PDPtr d;
  for (const auto& [name, f] : env.frames)
    if (f == w.frame) d = env.envelopes.at(name);
  if (d->cap() < 2) semantic_error(*c.entry, "solve-connection needs cap >= 2");
  ConnectionSolution sol = solve_connection(w);
  o.details["unknowns"] = sol.unknowns;
  o.details["solvable"] = sol.solvable;
  Json ledger = Json::object();
  ledger["precision"] = d->coefficients().m();
  ledger["phi1_digits_certified"] = d->coefficients().m() - 1;
  o.details["ledger"] = ledger;
  if (!sol.solvable) {
    o.outcome = "finding";
    o.summary = "no horizontal connection";
    return o;
  }
  const Connection& conn = sol.particular;
  o.details["log_p_solutions"] = sol.log_p_homogeneous;
  o.details["connection"] = connection_to_string(w, conn);
  const bool horizontal = horizontality_check(w, conn).ok;
  IntegrabilityReport ig = integrability_and_qnilpotence(w, conn);
  Stratification st = connection_to_stratification(square_zero_frame(d), w, conn);
  const bool round = connection_equal(stratification_to_connection(w, st), conn);
  o.details["horizontal"] = horizontal;
  o.details["integrable"] = ig.integrable;
  o.details["quasi_nilpotent"] = ig.quasi_nilpotent;
  o.details["nilpotence_indices"] = ig.indices;
  o.details["epsilon_iso"] = st.window_iso;
  o.details["round_trip"] = round;
  const bool ok = horizontal && ig.integrable && ig.quasi_nilpotent && st.window_iso && round;
  o.outcome = ok ? "pass" : "fail";
  o.summary = "p^" + std::to_string(sol.log_p_homogeneous) + " connections; " +
              (ok ? "integrable, quasi-nilpotent, epsilon iso" : "check failed: " + ig.note);
  return o;
}

Outcome cmd_torsion(const Env& env, const Command& c) {
  Outcome o;
  const PDAlgebra& d = *env.envelopes.at(c.args.at("frame"));
  auto rep = d.torsion_probe();
  Json wit = Json::array();
  bool ok = true;
  for (const auto& t : rep.witnesses) {
    wit.push_back(d.to_string(t));
    ok = ok && is_zero(d.scale(d.p(), t)) && !is_zero(t);
  }
  o.details["level"] = rep.level;
  o.details["free_rank_lower"] = rep.free_rank_lower;
  o.details["witnesses"] = wit;
  o.outcome = !ok ? "fail" : rep.witnesses.empty() ? "pass" : "finding";
  o.summary = std::to_string(rep.witnesses.size()) + " torsion elements (" + rep.level + ")";
  return o;
}

Outcome cmd_verify(const Env& env, const Command& c, const RunOptions& opts) {
  Outcome o;
  VerifyParams vp;
  vp.budgets = env.sc.budgets;
  vp.threads = std::max(1, opts.threads);
  if (c.args.count("p"))
    for (const auto& x : split(c.args.at("p"), ',')) {
      Entry tmp = *c.entry;
      tmp.value = x;
      vp.primes.push_back(entry_int(tmp));
    }
  vp.precision = c.args.count("precision") ? static_cast<int>(arg_int(c, "precision")) : opts.internal_precision;
  try {
    if (c.args.count("grid")) vp.grid = parse_grid(c.args.at("grid"));
    VerifyResult r = run_verify(c.positional, vp);
    Json checks = Json::array();
    for (const auto& k : r.checks) {
      Json row = Json::object();
      row["name"] = k.name;
      row["cases"] = k.cases;
      row["passed"] = k.passed;
      row["counterexamples"] = k.counterexamples;
      checks.push_back(row);
    }
    o.details["tag"] = r.tag;
    o.details["checks"] = checks;
    o.details["notes"] = r.notes;
    o.outcome = r.ok() ? "pass" : "fail";
    i64 cases = 0, passed = 0;
    for (const auto& k : r.checks) {
      cases += k.cases;
      passed += k.passed;
    }
    o.summary = std::to_string(passed) + "/" + std::to_string(cases) + " cases";
  } catch (const std::invalid_argument& e) {
    semantic_error(*c.entry, e.what());
  }
  return o;
}

Outcome run_command(const Env& env, const Command& c, const RunOptions& opts) {
  if (c.verb == "validate") return cmd_validate(env, c);
  if (c.verb == "classify") return cmd_classify(env, c);
  if (c.verb == "fv") return cmd_fv(env, c);
  if (c.verb == "hom") return cmd_hom(env, c);
  if (c.verb == "base-change") return cmd_base_change(env, c);
  if (c.verb == "lift") return cmd_lift(env, c);
  if (c.verb == "solve-connection") return cmd_solve_connection(env, c);
  if (c.verb == "torsion-probe") return cmd_torsion(env, c);
  return cmd_verify(env, c, opts);
}

std::string base_name(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

Json report_header(const Scenario& sc) {
  Json j = Json::object();
  j["format_version"] = kReportFormatVersion;
  j["scenario"] = base_name(sc.source);
  j["scenario_format_version"] = sc.format_version;
  return j;
}

Json error_json(const std::string& kind, int line, int column, const std::string& msg) {
  Json e = Json::object();
  e["kind"] = kind;
  e["line"] = line;
  e["column"] = column;
  e["message"] = msg;
  return e;
}

std::string location(const std::string& source, int line, int column) {
  return line > 0 ? source + ":" + std::to_string(line) + ":" + std::to_string(column) : source;
}

}  // namespace

RunResult run_scenario(const Scenario& sc, const RunOptions& opts) {
  auto field_line = [&](const std::string& k) { return sc.field_lines.count(k) ? sc.field_lines.at(k) : 1; };
  if (!is_prime(sc.p)) semantic_error(field_line("p"), 1, "p = " + std::to_string(sc.p) + " is not a prime");
  if (sc.precision < 1) semantic_error(field_line("precision"), 1, "precision must be positive");
  if (sc.depth < 0 || sc.depth > MonomialAlgebra::kMaxDepth) semantic_error(field_line("depth"), 1, "depth out of range");
  if (sc.budgets.max_carrier_size < 1 || sc.budgets.max_enumeration < 1 || sc.budgets.max_cap < 1)
    semantic_error(1, 1, "budgets must be positive");
  if (opts.internal_precision != 0 && opts.internal_precision < sc.precision)
    semantic_error(0, 0, "--internal-precision is below the scenario precision");
  Env env{sc, opts.internal_precision ? opts.internal_precision : sc.precision, {}, {}, {}, {}, {}};
  build_declarations(env);
  std::vector<Command> commands;
  for (const auto& s : sc.sections)
    if (s.kind == "commands")
      for (const auto& e : s.entries) commands.push_back(parse_command(env, e));

  RunResult res;
  Json report = report_header(sc);
  report["p"] = sc.p;
  Json prec = Json::object();
  prec["declared"] = sc.precision;
  prec["internal"] = env.precision;
  report["precision"] = prec;
  Json budgets = Json::object();
  budgets["max_carrier_size"] = sc.budgets.max_carrier_size;
  budgets["max_enumeration"] = sc.budgets.max_enumeration;
  budgets["max_cap"] = sc.budgets.max_cap;
  report["budgets"] = budgets;
  Json records = Json::array();
  std::ostringstream text;
  text << "scenario " << base_name(sc.source) << " (format_version " << sc.format_version << ", p = " << sc.p
       << ", precision " << env.precision << ")\n";
  std::map<std::string, int> counts = {{"pass", 0}, {"fail", 0}, {"finding", 0}};
  int index = 0;
  for (const auto& c : commands) {
    ++index;
    Json rec = Json::object();
    rec["index"] = index;
    rec["line"] = c.entry->line;
    rec["command"] = c.verb;
    rec["arguments"] = c.entry->value;
    Outcome o;
    try {
      o = run_command(env, c, opts);
    } catch (const AlgebraError& e) {
      o.outcome = "fail";
      o.summary = e.what();
    } catch (const ScenarioError& e) {
      res.exit_code = kExitSemantic;
      report["error"] = error_json("semantic", e.line(), e.column(), e.what());
      text << location(sc.source, e.line(), e.column()) << ": semantic error: " << e.what() << "\n";
      break;
    } catch (const BudgetExceeded& e) {
      res.exit_code = kExitBudget;
      report["error"] = error_json("budget", c.entry->line, c.entry->column, e.what());
      text << location(sc.source, c.entry->line, c.entry->column) << ": budget exceeded: " << e.what() << "\n";
      break;
    }
    ++counts[o.outcome];
    rec["outcome"] = o.outcome;
    rec["summary"] = o.summary;
    rec["details"] = o.details;
    records.push_back(rec);
    text << "  [" << o.outcome << "] line " << c.entry->line << ": " << c.verb
         << (c.entry->value.empty() ? "" : " " + c.entry->value) << ": " << o.summary << "\n";
  }
  if (res.exit_code == kExitOk && counts["fail"] > 0) res.exit_code = kExitAssertion;
  report["commands"] = records;
  Json summary = Json::object();
  summary["commands"] = records.size();
  summary["pass"] = counts["pass"];
  summary["fail"] = counts["fail"];
  summary["finding"] = counts["finding"];
  report["summary"] = summary;
  report["exit_code"] = res.exit_code;
  text << records.size() << " commands: " << counts["pass"] << " pass, " << counts["fail"] << " fail, "
       << counts["finding"] << " finding\n";
  res.text = text.str();
  res.json = report.dump(2) + "\n";
  return res;
}

RunResult run_scenario_file(const std::string& path, const RunOptions& opts) {
  RunResult res;
  Scenario sc;
  sc.source = path;
  auto fail = [&](int code, const std::string& kind, int line, int col, const std::string& msg) {
    res.exit_code = code;
    Json report = report_header(sc);
    report["error"] = error_json(kind, line, col, msg);
    report["exit_code"] = code;
    res.json = report.dump(2) + "\n";
    res.text = location(path, line, col) + ": " + kind + " error: " + msg + "\n";
  };
  try {
    sc = load_scenario(path, default_budgets());
    return run_scenario(sc, opts);
  } catch (const ScenarioError& e) {
    const bool parse = e.kind() == ScenarioError::Kind::Parse;
    fail(parse ? kExitParse : kExitSemantic, parse ? "parse" : "semantic", e.line(), e.column(), e.what());
  } catch (const BudgetExceeded& e) {
    fail(kExitBudget, "budget", 0, 0, e.what());
  } catch (const std::invalid_argument& e) {  // malformed budget environment variable
    fail(kExitSemantic, "semantic", 0, 0, e.what());
  } catch (const AlgebraError& e) {
    fail(kExitSemantic, "semantic", 0, 0, e.what());
  } catch (const std::runtime_error& e) {  // unreadable file
    fail(kExitParse, "parse", 0, 0, e.what());
  }
  return res;
}

}  // namespace crystaframe
