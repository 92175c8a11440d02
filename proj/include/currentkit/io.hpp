#pragma once

// JSON input (chains, polynomial forms, boxes, motions, scenario configs) and
// CSV number formatting.

#include "kinematics.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace currentkit {

using Json = nlohmann::json;

/// Malformed input; `where` names the offending field or line.
class ParseError : public Error {
public:
    ParseError(const std::string& where, const std::string& what) : Error(where + ": " + what), where_(where) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

namespace detail {

inline const Json& field(const Json& j, const std::string& key, const std::string& path)
{
    if (!j.is_object()) throw ParseError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(path + "." + key, "missing field");
    return *it;
}

inline double number(const Json& j, const std::string& path)
{
    if (!j.is_number()) throw ParseError(path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(path, "non-finite number");
    return v;
}

inline int integer(const Json& j, const std::string& path)
{
    if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
    return j.get<int>();
}

inline double number_or(const Json& j, const std::string& key, double fallback, const std::string& path)
{
    if (!j.contains(key)) return fallback;
    return number(j[key], path + "." + key);
}

inline Vec vector(const Json& j, const std::string& path, int expected = -1)
{
    if (!j.is_array()) throw ParseError(path, "expected an array of numbers");
    if (expected >= 0 && static_cast<int>(j.size()) != expected)
        throw ParseError(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

inline std::vector<int> split_ints(const std::string& s, const std::string& path)
{
    std::vector<int> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            int v = std::stoi(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ParseError(path, "bad integer list '" + s + "'");
        }
    }
    return out;
}

/// 1-based line of a byte offset in the text.
inline std::size_t line_of(const std::string& text, std::size_t byte)
{
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size())), '\n'));
}

} // namespace detail

inline Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::string msg = e.what();
        auto cut = msg.find("] ");
        if (cut != std::string::npos) msg = msg.substr(cut + 2);
        throw ParseError(path.string() + ":" + std::to_string(detail::line_of(text, e.byte)), "invalid JSON (" + msg + ")");
    }
}

inline Box box_from_json(const Json& j, const std::string& path = "box")
{
    Vec lo = detail::vector(detail::field(j, "lower", path), path + ".lower");
    Vec hi = detail::vector(detail::field(j, "upper", path), path + ".upper", static_cast<int>(lo.size()));
    if ((hi.array() < lo.array()).any()) throw ParseError(path, "upper corner below lower corner");
    return Box(lo, hi);
}

inline Json box_to_json(const Box& b)
{
    return {{"lower", std::vector<double>(b.lower.data(), b.lower.data() + b.lower.size())},
            {"upper", std::vector<double>(b.upper.data(), b.upper.data() + b.upper.size())}};
}

/// {"ambient", "degree", "vertices": [[...]], "simplices": [{"vertices": [...], "multiplicity": m}]}
inline Chain chain_from_json(const Json& j, const std::string& path = "chain")
{
    const int n = detail::integer(detail::field(j, "ambient", path), path + ".ambient");
    const int r = detail::integer(detail::field(j, "degree", path), path + ".degree");
    if (n < 1 || n > kMaxAmbient) throw ParseError(path + ".ambient", "ambient dimension out of range");
    if (r < 0 || r > n) throw ParseError(path + ".degree", "degree out of range");
    Chain c(r, n);
    const Json& verts = detail::field(j, "vertices", path);
    if (!verts.is_array()) throw ParseError(path + ".vertices", "expected an array");
    std::vector<int> ids;
    for (std::size_t i = 0; i < verts.size(); ++i)
        ids.push_back(c.add_vertex(detail::vector(verts[i], path + ".vertices[" + std::to_string(i) + "]", n)));
    const Json& simp = detail::field(j, "simplices", path);
    if (!simp.is_array()) throw ParseError(path + ".simplices", "expected an array");
    for (std::size_t s = 0; s < simp.size(); ++s) {
        const std::string sp = path + ".simplices[" + std::to_string(s) + "]";
        const Json& vj = detail::field(simp[s], "vertices", sp);
        if (!vj.is_array() || static_cast<int>(vj.size()) != r + 1)
            throw ParseError(sp + ".vertices", "expected " + std::to_string(r + 1) + " vertex indices");
        std::vector<int> idx;
        for (std::size_t k = 0; k < vj.size(); ++k) {
            int v = detail::integer(vj[k], sp + ".vertices[" + std::to_string(k) + "]");
            if (v < 0 || v >= static_cast<int>(ids.size()))
                throw ParseError(sp + ".vertices[" + std::to_string(k) + "]", "vertex index out of range");
            idx.push_back(ids[static_cast<std::size_t>(v)]);
        }
        double m = simp[s].contains("multiplicity") ? detail::number(simp[s]["multiplicity"], sp + ".multiplicity") : 1.0;
        try {
            c.add_simplex(idx, m);
        } catch (const Error& e) {
            throw ParseError(sp, e.what());
        }
    }
    return c;
}

inline Json chain_to_json(const Chain& c)
{
    Json verts = Json::array();
    for (const auto& v : c.vertices()) verts.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    Json simp = Json::array();
    for (const auto& [idx, m] : c.term_map()) simp.push_back({{"vertices", idx}, {"multiplicity", m}});
    return {{"ambient", c.ambient()}, {"degree", c.degree()}, {"vertices", verts}, {"simplices", simp}};
}

inline Chain load_chain(const std::filesystem::path& path)
{
    return chain_from_json(read_json_file(path), path.string());
}

/// {"ambient", "degree", "coefficients": {"0,1": {"2,0": c, ...}}}: outer keys
/// are 0-based increasing basis indices ("" for 0-forms), inner keys exponents.
inline PolyForm<double> polyform_from_json(const Json& j, const std::string& path = "form")
{
    const int n = detail::integer(detail::field(j, "ambient", path), path + ".ambient");
    const int r = detail::integer(detail::field(j, "degree", path), path + ".degree");
    if (n < 1 || n > kMaxAmbient || r < 0 || r > n) throw ParseError(path, "degree or ambient dimension out of range");
    PolyForm<double> f(r, n);
    const Json& coeffs = detail::field(j, "coefficients", path);
    if (!coeffs.is_object()) throw ParseError(path + ".coefficients", "expected an object");
    for (const auto& [key, poly] : coeffs.items()) {
        const std::string kp = path + ".coefficients[\"" + key + "\"]";
        std::vector<int> entries = detail::split_ints(key, kp);
        MultiIndex idx;
        try {
            idx = MultiIndex(entries, n);
        } catch (const Error& e) {
            throw ParseError(kp, e.what());
        }
        if (idx.degree() != r) throw ParseError(kp, "basis index has the wrong degree");
        if (!poly.is_object()) throw ParseError(kp, "expected an object of monomials");
        Polynomial<double> p(n);
        for (const auto& [ek, c] : poly.items()) {
            std::vector<int> e = detail::split_ints(ek, kp + "[\"" + ek + "\"]");
            if (static_cast<int>(e.size()) != n) throw ParseError(kp + "[\"" + ek + "\"]", "exponent length must equal the ambient dimension");
            for (int k : e)
                if (k < 0) throw ParseError(kp + "[\"" + ek + "\"]", "negative exponent");
            p += Polynomial<double>::monomial(n, e, detail::number(c, kp + "[\"" + ek + "\"]"));
        }
        f.component(idx.rank()) += p;
    }
    return f;
}

inline Json polyform_to_json(const PolyForm<double>& f)
{
    auto join = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    Json coeffs = Json::object();
    for (const auto& idx : MultiIndex::all(f.degree(), f.ambient())) {
        const auto& p = f.component(idx);
        if (p.is_zero()) continue;
        Json terms = Json::object();
        for (const auto& [e, c] : p.terms()) terms[join(e)] = c;
        coeffs[join(idx.entries())] = terms;
    }
    return {{"ambient", f.ambient()}, {"degree", f.degree()}, {"coefficients", coeffs}};
}

namespace detail {

inline Cutoff cutoff_from_json(const Json& j, const std::string& path)
{
    Cutoff c;
    c.inner = box_from_json(field(j, "inner", path), path + ".inner");
    c.margin = number_or(j, "margin", 0.5, path);
    if (!(c.margin > 0.0)) throw ParseError(path + ".margin", "margin must be positive");
    return c;
}

} // namespace detail

/// {"family": name, "params": {...}}. Families: identity, translation, shear,
/// expansion, scaling, twist (alias rotation), tent.
inline Motion motion_from_json(const Json& j, const std::string& path = "motion")
{
    if (!detail::field(j, "family", path).is_string()) throw ParseError(path + ".family", "expected a string");
    const std::string family = j["family"].get<std::string>();
    const Json params = j.contains("params") ? j["params"] : Json::object();
    const std::string pp = path + ".params";
    auto num = [&](const char* k, double d) { return detail::number_or(params, k, d, pp); };
    auto req = [&](const char* k) { return detail::number(detail::field(params, k, pp), pp + "." + k); };
    auto vec = [&](const char* k) { return detail::vector(detail::field(params, k, pp), pp + "." + k); };
    try {
        if (family == "identity") {
            Box b = box_from_json(detail::field(params, "box", pp), pp + ".box");
            return motions::identity(b.dim(), b, num("t0", -1.0), num("t1", 1.0));
        }
        if (family == "translation") {
            Cutoff c = detail::cutoff_from_json(detail::field(params, "cutoff", pp), pp + ".cutoff");
            return motions::translation(vec("velocity"), c, num("t0", -0.5), num("t1", 0.5));
        }
        if (family == "shear") {
            Cutoff c = detail::cutoff_from_json(detail::field(params, "cutoff", pp), pp + ".cutoff");
            return motions::shear(c.inner.dim(), req("k"), c, num("t0", -0.5), num("t1", 0.5));
        }
        if (family == "expansion") {
            Cutoff c = detail::cutoff_from_json(detail::field(params, "cutoff", pp), pp + ".cutoff");
            return motions::expansion(c.inner.dim(), c, num("t0", -0.1), num("t1", 0.1));
        }
        if (family == "scaling") {
            Cutoff c = detail::cutoff_from_json(detail::field(params, "cutoff", pp), pp + ".cutoff");
            return motions::exponential_scaling(c.inner.dim(), c, num("t0", -0.1), num("t1", 0.1));
        }
        if (family == "twist" || family == "rotation") {
            return motions::twist(vec("center"), req("omega"), req("r0"), req("r1"), num("t0", -1.0), num("t1", 1.0));
        }
        if (family == "tent") {
            return motions::tent(vec("center"), req("width"), req("amplitude"), vec("direction"), num("t0", 0.0), num("t1", 0.5));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(path, e.what());
    }
    throw ParseError(path + ".family", "unknown motion family '" + family + "'");
}

/// Polynomial-in-time cochain: {"terms": [{"power": k, "form": {...}}]}.
inline std::vector<PolyForm<double>> cochain_terms_from_json(const Json& j, const std::string& path = "cochain")
{
    const Json& terms = detail::field(j, "terms", path);
    if (!terms.is_array() || terms.empty()) throw ParseError(path + ".terms", "expected a nonempty array");
    std::vector<PolyForm<double>> out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tp = path + ".terms[" + std::to_string(i) + "]";
        int k = terms[i].contains("power") ? detail::integer(terms[i]["power"], tp + ".power") : 0;
        if (k < 0 || k > 8) throw ParseError(tp + ".power", "time power out of range [0, 8]");
        PolyForm<double> f = polyform_from_json(detail::field(terms[i], "form", tp), tp + ".form");
        if (!out.empty() && (f.degree() != out.front().degree() || f.ambient() != out.front().ambient()))
            throw ParseError(tp + ".form", "all cochain terms must share degree and ambient dimension");
        if (out.size() <= static_cast<std::size_t>(k)) out.resize(static_cast<std::size_t>(k) + 1, PolyForm<double>(f.degree(), f.ambient()));
        out[static_cast<std::size_t>(k)] += f;
    }
    return out;
}

struct ComplexSpec {
    Box box;
    int resolution = 4;
};

/// One scenario. Optional parts are absent when the config omits them.
struct ScenarioConfig {
    std::string name;
    std::string source;
    Chain chain;
    std::optional<ComplexSpec> complex;
    std::optional<Json> motion_spec;
    std::optional<Motion> motion;
    std::vector<PolyForm<double>> cochain; // coefficients of t^k
    double tau = 0.0;
    std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
    std::vector<int> levels{0, 1, 2, 3};
    std::uint64_t seed = 42;
    std::map<std::string, double> tolerances;
    bool export_lp = false;

    double tolerance(const std::string& key, double fallback) const
    {
        auto it = tolerances.find(key);
        return it == tolerances.end() ? fallback : it->second;
    }
};

inline ScenarioConfig scenario_from_json(const Json& j, const std::filesystem::path& base, const std::string& path)
{
    ScenarioConfig s;
    s.source = path;
    const Json& name = detail::field(j, "name", path);
    if (!name.is_string() || name.get<std::string>().empty()) throw ParseError(path + ".name", "expected a nonempty string");
    s.name = name.get<std::string>();
    for (char ch : s.name)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-'))
            throw ParseError(path + ".name", "names may only use letters, digits, '_' and '-'");
    const Json& cj = detail::field(j, "chain", path);
    if (cj.is_string()) {
        auto file = base / cj.get<std::string>();
        if (!std::filesystem::exists(file)) throw ParseError(path + ".chain", "chain file '" + file.string() + "' does not exist");
        s.chain = load_chain(file);
    } else {
        s.chain = chain_from_json(cj, path + ".chain");
    }
    const int n = s.chain.ambient();
    if (j.contains("complex")) {
        const std::string cp = path + ".complex";
        ComplexSpec c;
        c.box = box_from_json(detail::field(j["complex"], "box", cp), cp + ".box");
        if (c.box.dim() != n) throw ParseError(cp + ".box", "dimension differs from the chain's");
        if (j["complex"].contains("resolution")) c.resolution = detail::integer(j["complex"]["resolution"], cp + ".resolution");
        if (c.resolution < 1 || c.resolution > 64) throw ParseError(cp + ".resolution", "resolution out of range [1, 64]");
        s.complex = c;
    }
    if (j.contains("motion")) {
        s.motion_spec = j["motion"];
        s.motion = motion_from_json(j["motion"], path + ".motion");
        if (s.motion->dim() != n) throw ParseError(path + ".motion", "dimension differs from the chain's");
    }
    if (j.contains("cochain")) {
        s.cochain = cochain_terms_from_json(j["cochain"], path + ".cochain");
        if (s.cochain.front().ambient() != n || s.cochain.front().degree() != s.chain.degree())
            throw ParseError(path + ".cochain", "cochain degree must match the chain");
    }
    s.tau = detail::number_or(j, "tau", 0.0, path);
    if (s.motion) {
        if (!(s.motion->t0() <= s.tau && s.tau <= s.motion->t1())) throw ParseError(path + ".tau", "outside the motion's time interval");
    }
    if (j.contains("epsilons")) {
        Vec e = detail::vector(j["epsilons"], path + ".epsilons");
        s.epsilons.assign(e.data(), e.data() + e.size());
        for (double x : s.epsilons)
            if (!(x > 0.0)) throw ParseError(path + ".epsilons", "epsilons must be positive");
    }
    if (j.contains("levels")) {
        const Json& l = j["levels"];
        if (!l.is_array() || l.empty()) throw ParseError(path + ".levels", "expected a nonempty array");
        s.levels.clear();
        for (std::size_t i = 0; i < l.size(); ++i) {
            int v = detail::integer(l[i], path + ".levels[" + std::to_string(i) + "]");
            if (v < 0 || v > 6) throw ParseError(path + ".levels[" + std::to_string(i) + "]", "refinement level out of range [0, 6]");
            s.levels.push_back(v);
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ParseError(path + ".seed", "expected an unsigned integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("tolerances")) {
        const Json& t = j["tolerances"];
        if (!t.is_object()) throw ParseError(path + ".tolerances", "expected an object");
        for (const auto& [k, v] : t.items()) s.tolerances[k] = detail::number(v, path + ".tolerances." + k);
    }
    if (j.contains("export_lp")) s.export_lp = j["export_lp"].get<bool>();
    return s;
}

/// A config file holds one scenario or {"scenarios": [file or object, ...]}.
inline std::vector<ScenarioConfig> load_scenarios(const std::filesystem::path& file)
{
    Json j = read_json_file(file);
    const auto base = file.parent_path();
    std::vector<ScenarioConfig> out;
    if (j.is_object() && j.contains("scenarios")) {
        const Json& list = j["scenarios"];
        if (!list.is_array()) throw ParseError(file.string() + ":scenarios", "expected an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string p = file.string() + ":scenarios[" + std::to_string(i) + "]";
            if (list[i].is_string()) {
                auto sub = base / list[i].get<std::string>();
                if (!std::filesystem::exists(sub)) throw ParseError(p, "scenario file '" + sub.string() + "' does not exist");
                out.push_back(scenario_from_json(read_json_file(sub), sub.parent_path(), sub.string()));
            } else {
                out.push_back(scenario_from_json(list[i], base, p));
            }
        }
    } else {
        out.push_back(scenario_from_json(j, base, file.string()));
    }
    std::set<std::string> names;
    for (const auto& s : out)
        if (!names.insert(s.name).second) throw ParseError(s.source, "duplicate scenario name '" + s.name + "'");
    return out;
}

/// CSV number: '%.17g' style round-trip digits, scientific below 1e-3, "0" for zero.
inline std::string format_number(double x)
{
    if (x == 0.0) return "0";
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    if (std::abs(x) < 1e-3) std::snprintf(buf, sizeof buf, "%.10e", x);
    else std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace currentkit
