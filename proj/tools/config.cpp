#include "config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "landis/errors.hpp"
#include "landis/hash.hpp"

namespace landis::cli {

using nlohmann::json;

namespace {

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            fail("", "expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            fail(key, std::string("expected ") + kind<T>());
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        T v{};
        get(key, v);
        if (j_.contains(key))
            out = v;
    }

    std::optional<Reader> child(const char* key) {
        seen_.insert(key);
        if (!j_.contains(key))
            return std::nullopt;
        return Reader(j_.at(key), field(key));
    }

    bool has(const char* key) const { return j_.contains(key); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                fail(it.key(), "unknown field");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError("config", "field '" + field(key) + "': " + msg);
    }

    std::string field(const std::string& key) const {
        if (key.empty())
            return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    template <class T>
    static const char* kind() {
        if constexpr (std::is_same_v<T, bool>)
            return "a boolean";
        else if constexpr (std::is_same_v<T, std::string>)
            return "a string";
        else if constexpr (std::is_integral_v<T>)
            return "an integer";
        else if constexpr (std::is_floating_point_v<T>)
            return "a number";
        else
            return "an array of numbers";
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::uint64_t derive(std::uint64_t master, const char* name) {
    return fnv1a(name, fnv1a(std::to_string(master))) & 0x7fffffffULL;
}

void increasing(const Reader& r, const char* key, const std::vector<double>& v, bool positive = true) {
    if (v.empty())
        r.fail(key, "must not be empty");
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (positive && !(v[k] > 0))
            r.fail(key, "entries must be positive");
        if (k && !(v[k] > v[k - 1]))
            r.fail(key, "entries must be strictly increasing");
    }
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
        if (text[k] == '\n')
            ++line, col = 1;
        else
            ++col;
    }
    return {line, col};
}

} // namespace

ExperimentConfig load_config(const std::string& text, std::optional<std::uint64_t> seed_override,
                             std::optional<int> grid_override) {
    json j;
    try {
        j = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte);
        throw ConfigError("config", "syntax error at line " + std::to_string(line) + ", column " +
                                        std::to_string(col) + ": " + e.what());
    }

    ExperimentConfig c;
    Reader root(j, "");
    std::optional<std::uint64_t> coef_seed, pot_seed, bd_seed, hat_seed;
    root.get("seed", c.seed);
    if (seed_override)
        c.seed = *seed_override;

    std::string variant = to_string(c.variant);
    root.get("variant", variant);
    try {
        c.variant = parse_variant(variant);
    } catch (const Error&) {
        root.fail("variant", "expected electric, div_magnetic or nondiv_magnetic");
    }

    if (auto g = root.child("grid")) {
        g->get("half_width", c.half_width);
        g->get("n", c.n);
        g->finish();
    }
    if (grid_override)
        c.n = *grid_override;
    if (!(c.half_width > 0))
        root.fail("grid.half_width", "must be positive");
    if (c.n < 8 || c.n > 4096)
        root.fail("grid.n", "must lie in [8, 4096]");

    if (auto k = root.child("coefficients")) {
        k->get("family", c.family);
        k->get("lambda", c.lambda);
        k->get("mu", c.mu);
        k->get("seed", coef_seed);
        k->get("det_one", c.det_one);
        std::vector<double> m;
        k->get("matrix", m);
        if (k->has("matrix")) {
            if (m.size() != 3)
                k->fail("matrix", "expected [a11, a12, a22]");
            c.matrix = {m[0], m[1], m[2]};
        }
        k->finish();
        if (c.family != "identity" && c.family != "constant" && c.family != "trig")
            k->fail("family", "expected identity, constant or trig");
        if (!(c.lambda > 0 && c.lambda <= 1))
            k->fail("lambda", "must lie in (0, 1]");
        if (!(c.mu >= 0))
            k->fail("mu", "must be nonnegative");
    }

    if (auto p = root.child("potential")) {
        if (p->has("M") && p->has("M_list"))
            p->fail("M", "give either M or M_list");
        double M = 1.0;
        p->get("M", M);
        if (p->has("M"))
            c.M_list = {M};
        p->get("M_list", c.M_list);
        p->get("seed", pot_seed);
        p->get("with_W", c.with_W);
        p->get("freq", c.potential_freq);
        p->finish();
        increasing(*p, "M_list", c.M_list);
        if (c.M_list.front() < 1)
            p->fail("M_list", "entries must be at least 1");
    }

    if (auto b = root.child("boundary")) {
        b->get("seed", bd_seed);
        b->get("offset", c.boundary_offset);
        b->get("amplitude", c.boundary_amplitude);
        b->get("freq", c.boundary_freq);
        b->finish();
    }

    if (auto g = root.child("geometry")) {
        g->get("b", c.b);
        g->get("d", c.d);
        g->get("radii", c.radii);
        g->get("pole_domain", c.pole_domain);
        g->finish();
        increasing(*g, "radii", c.radii);
        if (!(c.pole_domain > 0 && c.pole_domain < 1))
            g->fail("pole_domain", "must lie in (0, 1)");
        if (c.b && c.d && !(*c.b > 0 && *c.d > *c.b))
            g->fail("d", "expected 0 < b < d");
    }

    if (auto t = root.child("three_circle")) {
        t->get("s", c.s);
        t->get("f", c.f_kind);
        t->get("n", c.power);
        t->get("hat_r", c.hat_r);
        t->get("hat_seed", hat_seed);
        t->get("hat_freq", c.hat_freq);
        t->finish();
        increasing(*t, "s", c.s);
        if (c.s.size() != 3)
            t->fail("s", "expected three radii");
        if (c.f_kind != "power" && c.f_kind != "sample")
            t->fail("f", "expected power or sample");
        if (!(c.hat_r >= 0 && c.hat_r < 1))
            t->fail("hat_r", "must lie in [0, 1)");
    }

    if (auto v = root.child("vanish")) {
        v->get("C0", c.C0);
        v->get("fit_radii", c.fit_radii);
        v->get("report_radii", c.report_radii);
        v->finish();
        increasing(*v, "fit_radii", c.fit_radii);
        increasing(*v, "report_radii", c.report_radii);
        if (!(c.C0 > 0))
            v->fail("C0", "must be positive");
    }

    if (auto s = root.child("scan")) {
        s->get("R_list", c.R_list);
        s->get("angles", c.angles);
        s->finish();
        increasing(*s, "R_list", c.R_list);
        if (c.R_list.front() <= 1)
            s->fail("R_list", "entries must exceed 1");
        if (c.angles < 1)
            s->fail("angles", "must be positive");
    }

    if (auto b = root.child("beltrami")) {
        b->get("lambdas", c.lambdas);
        b->get("samples", c.samples);
        b->finish();
        increasing(*b, "lambdas", c.lambdas);
        if (c.lambdas.back() > 1)
            b->fail("lambdas", "entries must lie in (0, 1]");
        if (c.samples < 1)
            b->fail("samples", "must be positive");
    }

    if (auto t = root.child("tolerances")) {
        t->get("residual", c.residual_tol);
        t->get("stream", c.stream_tol);
        t->get("three_circle", c.three_circle_tol);
        t->finish();
    }
    root.finish();

    c.coef_seed = coef_seed.value_or(derive(c.seed, "coefficients"));
    c.potential_seed = pot_seed.value_or(derive(c.seed, "potential"));
    c.boundary_seed = bd_seed.value_or(derive(c.seed, "boundary"));
    c.hat_seed = hat_seed.value_or(derive(c.seed, "hat"));
    return c;
}

ExperimentConfig load_config_file(const std::string& path, std::optional<std::uint64_t> seed_override,
                                  std::optional<int> grid_override) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str(), seed_override, grid_override);
}

json ExperimentConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["variant"] = landis::to_string(variant);
    j["grid"] = {{"half_width", half_width}, {"n", n}};
    j["coefficients"] = {{"family", family}, {"lambda", lambda},       {"mu", mu},
                         {"seed", coef_seed}, {"det_one", det_one},     {"matrix", {matrix.a11, matrix.a12, matrix.a22}}};
    j["potential"] = {{"M_list", M_list}, {"seed", potential_seed}, {"with_W", with_W}, {"freq", potential_freq}};
    j["boundary"] = {{"seed", boundary_seed},
                     {"offset", boundary_offset},
                     {"amplitude", boundary_amplitude},
                     {"freq", boundary_freq}};
    j["geometry"] = {{"radii", radii}, {"pole_domain", pole_domain}};
    if (b)
        j["geometry"]["b"] = *b;
    if (d)
        j["geometry"]["d"] = *d;
    j["three_circle"] = {{"s", s},         {"f", f_kind},         {"n", power},
                         {"hat_r", hat_r}, {"hat_seed", hat_seed}, {"hat_freq", hat_freq}};
    j["vanish"] = {{"C0", C0}, {"fit_radii", fit_radii}, {"report_radii", report_radii}};
    j["scan"] = {{"R_list", R_list}, {"angles", angles}};
    j["beltrami"] = {{"lambdas", lambdas}, {"samples", samples}};
    j["tolerances"] = {{"residual", residual_tol}, {"stream", stream_tol}, {"three_circle", three_circle_tol}};
    return j;
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a(to_json().dump())); }

} // namespace landis::cli
