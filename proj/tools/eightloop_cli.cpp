// eightloop: command-line driver for the toolkit.
//
// Every subcommand prints CSV (one-line header, 17 significant digits) to stdout; --csv and --json
// write the same tables to files. Exit status: 0 success, 1 computation error or failed --check,
// 2 usage error. EIGHTLOOP_TOL overrides the default quadrature tolerance.

#include "eightloop/identities.hpp"
#include "eightloop/picard_fuchs.hpp"
#include "eightloop/riccati.hpp"
#include "eightloop/simulator.hpp"
#include "eightloop/zeros.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

using namespace eightloop;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------------------------
// Output

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> r) {
        if (r.size() != columns.size()) throw std::logic_error("table row width mismatch in " + name);
        rows.push_back(std::move(r));
    }
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_cell(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return format_double(*d);
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
        os << "\n";
    }
}

nlohmann::ordered_json to_json(const Table& t) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
        nlohmann::ordered_json o;
        for (std::size_t i = 0; i < r.size(); ++i)
            std::visit([&](const auto& v) { o[t.columns[i]] = v; }, r[i]);
        rows.push_back(o);
    }
    return {{"name", t.name}, {"columns", t.columns}, {"rows", rows}};
}

struct Output {
    std::string csv_path, json_path;

    void emit(const std::string& command, const std::vector<Table>& tables) const {
        for (std::size_t i = 0; i < tables.size(); ++i) {
            if (tables.size() > 1) std::cout << (i ? "\n" : "") << "# " << tables[i].name << "\n";
            write_csv(std::cout, tables[i]);
        }
        if (!csv_path.empty()) {
            for (const Table& t : tables) {
                std::string path = csv_path;
                if (tables.size() > 1) {
                    auto dot = path.rfind(".csv");
                    path = (dot == std::string::npos ? path : path.substr(0, dot)) + "_" + t.name + ".csv";
                }
                std::ofstream f(path);
                if (!f) throw std::runtime_error("cannot write " + path);
                write_csv(f, t);
            }
        }
        if (!json_path.empty()) {
            nlohmann::ordered_json j;
            j["command"] = command;
            j["tables"] = nlohmann::ordered_json::array();
            for (const Table& t : tables) j["tables"].push_back(to_json(t));
            std::ofstream f(json_path);
            if (!f) throw std::runtime_error("cannot write " + json_path);
            f << j.dump(2) << "\n";
        }
    }
};

// ---------------------------------------------------------------------------------------------
// Checks

struct CheckList {
    Table table{"checks", {"check", "passed", "detail"}, {}};
    bool all = true;

    void add(const std::string& name, bool ok, const std::string& detail) {
        table.add({name, ok ? std::string("yes") : std::string("no"), detail});
        all = all && ok;
    }
    void add(const std::string& name, double value, double bound) {
        add(name, value <= bound, format_double(value) + " <= " + format_double(bound));
    }
};

// ---------------------------------------------------------------------------------------------
// Inputs

double default_tolerance() {
    const char* env = std::getenv("EIGHTLOOP_TOL");
    if (!env || !*env) return kDefaultTolerance;
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (*end != '\0' || !(v > 0.0)) throw UsageError(std::string("EIGHTLOOP_TOL must be a positive number, got '") + env + "'");
    return v;
}

double parse_number(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw UsageError("not a number for " + what + ": '" + s + "'");
    }
    if (pos != s.size() || !std::isfinite(v)) throw UsageError("not a number for " + what + ": '" + s + "'");
    return v;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Sets one coefficient from "a10" style key; rejects unknown or repeated keys.
void set_coefficient(PerturbationCoeffs& p, std::set<std::string>& seen, const std::string& key, const std::string& value) {
    static const std::regex re("([ab])([0-3])([0-3])");
    std::smatch m;
    if (!std::regex_match(key, m, re) || (m[2].str()[0] - '0') + (m[3].str()[0] - '0') > 3)
        throw UsageError("unknown coefficient key '" + key + "' (expected aij or bij with i + j <= 3)");
    if (!seen.insert(key).second) throw UsageError("coefficient '" + key + "' given twice");
    int i = m[2].str()[0] - '0', j = m[3].str()[0] - '0';
    (m[1] == "a" ? p.a : p.b)[i][j] = parse_number(value, key);
}

struct CoeffSource {
    std::string file;
    std::vector<std::string> inline_values;

    bool given() const { return !file.empty() || !inline_values.empty(); }

    PerturbationCoeffs load() const {
        PerturbationCoeffs p;
        std::set<std::string> seen;
        if (!file.empty()) {
            std::ifstream f(file);
            if (!f) throw UsageError("cannot open coefficient file " + file);
            std::string line;
            int no = 0;
            while (std::getline(f, line)) {
                ++no;
                line = trim(line.substr(0, line.find('#')));
                if (line.empty()) continue;
                auto eq = line.find('=');
                if (eq == std::string::npos)
                    throw UsageError(file + ":" + std::to_string(no) + ": expected 'key = value'");
                set_coefficient(p, seen, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
            }
        }
        for (const std::string& kv : inline_values) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw UsageError("--coeff expects key=value, got '" + kv + "'");
            set_coefficient(p, seen, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
        }
        return p;
    }

    void attach(CLI::App* sub) {
        sub->add_option("--coeffs", file, "Coefficient file with lines 'a10 = 1.0'");
        sub->add_option("--coeff", inline_values, "Inline coefficient key=value (repeatable)");
    }
};

struct LevelGrid {
    std::vector<double> h;
    int n = 0;

    std::vector<double> levels(int fallback) const {
        std::vector<double> out = h;
        int m = n > 0 ? n : (h.empty() ? fallback : 0);
        for (int i = 0; i < m; ++i) out.push_back(-0.25 + 0.25 * (i + 0.5) / m);
        for (double v : out)
            if (!(v >= -0.25 && v <= 0.0)) throw UsageError("level " + format_double(v) + " lies outside [-1/4, 0]");
        return out;
    }

    void attach(CLI::App* sub) {
        sub->set_help_flag("--help", "Print this help message and exit");  // frees -h for the level option
        sub->add_option("--h", h, "Energy level(s) in [-1/4, 0]");
        sub->add_option("--grid", n, "Number of uniformly spaced interior levels")->check(CLI::Range(1, 100000));
    }
};

std::vector<Annulus> annuli(const std::string& which) {
    if (which == "right") return {Annulus::Right};
    if (which == "left") return {Annulus::Left};
    if (which == "both") return {Annulus::Right, Annulus::Left};
    throw UsageError("--annulus must be right, left or both");
}

Theorem4Target parse_target(const std::string& s) {
    if (s == "5+0") return Theorem4Target::FiveZero;
    if (s == "3+3") return Theorem4Target::ThreeThree;
    if (s == "4+1") return Theorem4Target::FourOne;
    throw UsageError("--target must be 5+0, 3+3 or 4+1");
}

std::pair<int, int> parse_split(const std::string& s) {
    static const std::regex re("([0-9]+)\\+([0-9]+)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) throw UsageError("--target expects R+L, e.g. 3+3");
    return {std::stoi(m[1]), std::stoi(m[2])};
}

const std::vector<std::string> kEnvelopeColumns = {"order", "annulus", "alpha0", "alpha1", "beta0", "beta1", "gamma0", "gamma1"};

std::vector<Cell> envelope_row(const Envelope& e) {
    return {static_cast<long long>(e.order), std::string(to_string(e.annulus)), e.alpha0, e.alpha1, e.beta0, e.beta1,
            e.gamma0, e.gamma1};
}

Envelope envelope_of_order(const PerturbationCoeffs& p, int order, Annulus an) {
    switch (order) {
        case 1: return m1_envelope(p, an);
        case 2: return m2_envelope(p, an);
        case 3: return m3_envelope(p, an);
        case 4: return m4_envelope(p, an);
    }
    throw UsageError("--order must be 1..4");
}

PerturbationCoeffs random_coeffs(std::mt19937_64& rng, bool admissible) {
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    PerturbationCoeffs p;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; i + j < 4; ++j) p.a[i][j] = U(rng), p.b[i][j] = U(rng);
    if (admissible) {
        p.b[0][1] = -p.a[1][0];
        p.b[0][3] = -p.a[1][2] / 3.0;
        p.a[1][2] = -3.0 * p.b[0][3];
        p.b[1][1] = -2.0 * p.a[2][0];
        p.b[2][1] = -3.0 * p.a[3][0];
    }
    return p;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + format_double(x);
    return s;
}

// ---------------------------------------------------------------------------------------------
// Subcommands. Each returns the tables to emit; a failed --check is reported through `ok`.

struct Common {
    bool check = false;
    std::uint64_t seed = 1;
    double tol = 0.0;  // 0: take EIGHTLOOP_TOL or the library default
    Output out;

    double tolerance() const { return tol > 0.0 ? tol : default_tolerance(); }
    void attach(CLI::App* sub) {
        sub->add_flag("--check", check, "Run the module's invariant checks");
        sub->add_option("--seed", seed, "Seed for randomized work");
        sub->add_option("--tol", tol, "Quadrature tolerance (default: EIGHTLOOP_TOL or 1e-11)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--csv", out.csv_path, "Also write CSV to this path");
        sub->add_option("--json", out.json_path, "Also write a JSON mirror to this path");
    }
};

std::vector<Table> cmd_integrals(const Common& c, const LevelGrid& grid, int kmax, const std::string& which, bool& ok) {
    const double tol = c.tolerance();
    if (c.check) {
        CheckList ch;
        double e1 = 0.0;
        for (int i = 0; i < 50; ++i) {
            double h = -0.25 + 0.25 * i / 49.0;
            e1 = std::max(e1, std::abs(basic_integral(1, {h}, tol).value - kC1 * (h + 0.25)));
        }
        ch.add("I1 = pi sqrt2 (h + 1/4)", e1, 1e-9);
        ch.add("I0(0) = 4/3", std::abs(basic_integral(0, {0.0}, tol).value - 4.0 / 3.0), 1e-9);
        ch.add("I2(0) = 16/15", std::abs(basic_integral(2, {0.0}, tol).value - 16.0 / 15.0), 1e-9);
        double parity = 0.0;
        bool positive = true;
        for (int i = 1; i < 20; ++i) {
            double h = -0.25 + 0.25 * i / 20.0;
            for (int k = 0; k <= 6; ++k) {
                double r = basic_integral(k, {h}, tol).value, l = basic_integral(k, {h, Annulus::Left}, tol).value;
                parity = std::max(parity, std::abs(l - (k % 2 ? -r : r)));
                positive = positive && r > 0.0;
            }
        }
        ch.add("I_k(left) = (-1)^k I_k(right)", parity, 1e-12);
        ch.add("I_k > 0 on the right oval", positive, positive ? "ok" : "sign change");
        ok = ch.all;
        return {ch.table};
    }
    Table t{"integrals", {"h", "annulus"}, {}};
    for (int k = 0; k <= kmax; ++k) t.columns.push_back("I" + std::to_string(k));
    for (Annulus an : annuli(which))
        for (double h : grid.levels(10)) {
            std::vector<Cell> r = {h, std::string(to_string(an))};
            for (int k = 0; k <= kmax; ++k) r.push_back(basic_integral(k, {h, an}, tol).value);
            t.add(r);
        }
    return {t};
}

std::vector<Table> cmd_envelope(const Common& c, const CoeffSource& src, const LevelGrid& grid, int order,
                                const std::string& which, bool& ok) {
    const double tol = c.tolerance();
    if (c.check) {
        CheckList ch;
        std::mt19937_64 rng(c.seed);
        double e1 = 0.0, e2 = 0.0;
        for (int t = 0; t < 5; ++t) {
            PerturbationCoeffs p = src.given() && t == 0 ? src.load() : random_coeffs(rng, false);
            PerturbationCoeffs q = random_coeffs(rng, true);
            for (Annulus an : {Annulus::Right, Annulus::Left})
                for (double h : {-0.22, -0.15, -0.07, -0.01}) {
                    double ref = cycle_integral_fn(
                                     [&](double x, double y, double dx, double dy) { return p.g(x, y) * dx - p.f(x, y) * dy; },
                                     {h, an}, tol)
                                     .value;
                    e1 = std::max(e1, std::abs(evaluate_envelope(m1_envelope(p, an), {h}) - ref) / (1.0 + std::abs(ref)));
                    double ref2 = m2_via_francoise(q, {h, an}, tol);
                    e2 = std::max(e2, std::abs(evaluate_envelope(m2_envelope(q, an), {h}) - ref2) / (1.0 + std::abs(ref2)));
                }
        }
        ch.add("M1 envelope vs cycle integral of g dx - f dy", e1, 1e-9);
        ch.add("M2 envelope vs Francoise quadrature", e2, 1e-7);
        ok = ch.all;
        return {ch.table};
    }
    if (!src.given()) throw UsageError("envelope needs --coeffs or --coeff");
    PerturbationCoeffs p = src.load();
    Table env{"envelope", kEnvelopeColumns, {}};
    Table val{"values", {"annulus", "h", "value"}, {}};
    for (Annulus an : annuli(which)) {
        Envelope e = envelope_of_order(p, order, an);
        env.add(envelope_row(e));
        if (!grid.h.empty() || grid.n > 0)
            for (double h : grid.levels(0)) val.add({std::string(to_string(an)), h, e.evaluate(h, basis_integrals(h, tol))});
    }
    if (val.rows.empty()) return {env};
    return {env, val};
}

Envelope envelope_from_list(const std::vector<double>& v) {
    if (v.size() != 6) throw UsageError("--envelope expects 6 numbers: alpha0 alpha1 beta0 beta1 gamma0 gamma1");
    return {v[0], v[1], v[2], v[3], v[4], v[5], 2, Annulus::Right};
}

Table zero_table(const Distribution& d) {
    Table t{"zeros", {"annulus", "h", "multiplicity", "residual"}, {}};
    for (auto [name, rep] : {std::pair{"right", &d.right}, std::pair{"left", &d.left}})
        for (const Zero& z : rep->zeros) t.add({std::string(name), z.h, static_cast<long long>(z.multiplicity), z.residual});
    return t;
}

Table count_table(const Distribution& d) {
    Table t{"counts", {"right", "left", "total"}, {}};
    int r = d.right.count_with_multiplicity, l = d.left.count_with_multiplicity;
    t.add({static_cast<long long>(r), static_cast<long long>(l), static_cast<long long>(r + l)});
    return t;
}

struct CapStats {
    int side = 0, total = 0, beta1 = 0, beta = 0;
};

CapStats random_caps(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    BasisTable table(300);
    CapStats s;
    auto tot = [](const Distribution& d) { return d.right.count_with_multiplicity + d.left.count_with_multiplicity; };
    for (int i = 0; i < n; ++i) {
        Distribution d = distribution(random_envelope(rng), &table);
        s.side = std::max({s.side, d.right.count_with_multiplicity, d.left.count_with_multiplicity});
        s.total = std::max(s.total, tot(d));
        s.beta1 = std::max(s.beta1, tot(distribution(random_envelope(rng, true), &table)));
        s.beta = std::max(s.beta, tot(distribution(random_envelope(rng, false, true), &table)));
    }
    return s;
}

void add_cap_checks(CheckList& ch, const CapStats& s, int n) {
    std::string tag = " over " + std::to_string(n) + " random envelopes";
    ch.add("at most 5 zeros per annulus" + tag, s.side <= 5, std::to_string(s.side));
    ch.add("at most 9 zeros in total" + tag, s.total <= 9, std::to_string(s.total));
    ch.add("at most 7 zeros with beta1 = 0" + tag, s.beta1 <= 7, std::to_string(s.beta1));
    ch.add("at most 6 zeros with beta0 = beta1 = 0" + tag, s.beta <= 6, std::to_string(s.beta));
}

std::vector<Table> cmd_zeros(const Common& c, const CoeffSource& src, const std::vector<double>& list, bool& ok) {
    if (c.check) {
        CheckList ch;
        auto cubic = count_zeros([](double h) { return (h + 0.2) * (h + 0.1) * (h + 0.03); });
        ch.add("three simple roots", cubic.count_with_multiplicity == 3, std::to_string(cubic.count_with_multiplicity));
        auto dbl = count_zeros([](double h) { return (h + 0.13) * (h + 0.13); });
        ch.add("double root counted twice", dbl.count_with_multiplicity == 2, std::to_string(dbl.count_with_multiplicity));
        auto tri = count_zeros([](double h) { return std::pow(h + 0.11, 3); });
        ch.add("triple root flagged", tri.count_with_multiplicity == 3, std::to_string(tri.count_with_multiplicity));
        add_cap_checks(ch, random_caps(c.seed, 1000), 1000);
        ok = ch.all;
        return {ch.table};
    }
    Envelope e;
    if (!list.empty()) {
        if (src.given()) throw UsageError("give either --envelope or coefficients, not both");
        e = envelope_from_list(list);
    } else if (src.given()) {
        e = m2_envelope(src.load());
    } else {
        throw UsageError("zeros needs --envelope or --coeffs/--coeff");
    }
    Distribution d = distribution(e);
    return {count_table(d), zero_table(d)};
}

std::vector<Table> cmd_distribution(const Common& c, const std::string& target, int budget, bool freeze_beta, int random,
                                    bool& ok) {
    if (c.check) {
        CheckList ch;
        add_cap_checks(ch, random_caps(c.seed, 1000), 1000);
        SearchResult r = search_distribution(3, 3, 400, c.seed, true);
        ch.add("3+3 reached with beta0 = beta1 = 0", r.reached, std::to_string(r.right) + "+" + std::to_string(r.left));
        ok = ch.all;
        return {ch.table};
    }
    if (random > 0) {
        CapStats s = random_caps(c.seed, random);
        Table t{"random_caps", {"samples", "max_per_annulus", "max_total", "max_total_beta1_zero", "max_total_beta_zero"}, {}};
        t.add({static_cast<long long>(random), static_cast<long long>(s.side), static_cast<long long>(s.total),
               static_cast<long long>(s.beta1), static_cast<long long>(s.beta)});
        return {t};
    }
    auto [r, l] = parse_split(target);
    SearchResult res = search_distribution(r, l, budget, c.seed, freeze_beta);
    Table s{"search", {"target", "reached", "right", "left", "evaluations"}, {}};
    s.add({target, std::string(res.reached ? "yes" : "no"), static_cast<long long>(res.right),
           static_cast<long long>(res.left), static_cast<long long>(res.evaluations)});
    Table env{"envelope", kEnvelopeColumns, {}};
    env.add(envelope_row(res.best));
    if (!res.reached) ok = false;
    return {s, env, zero_table(distribution(res.best))};
}

RiccatiId parse_system(const std::string& s) {
    for (RiccatiId id : {RiccatiId::Nu, RiccatiId::Omega, RiccatiId::U, RiccatiId::V, RiccatiId::W})
        if (s == to_string(id)) return id;
    throw UsageError("--system must be nu, omega, u, v, w or all");
}

std::vector<Table> cmd_riccati(const Common& c, const std::string& system, int n, double delta, bool& ok) {
    std::vector<RiccatiId> ids;
    if (system == "all")
        ids = {RiccatiId::Nu, RiccatiId::Omega, RiccatiId::U, RiccatiId::V, RiccatiId::W};
    else
        ids = {parse_system(system)};
    SeparatrixOptions opt;
    opt.delta = delta;
    if (c.check) {
        CheckList ch;
        std::vector<double> g = interior_grid(60, 1e-3);
        for (RiccatiId id : ids) {
            RiccatiSystem sys = riccati_system(id);
            RatioCurve sep = separatrix(sys, g, opt), ref = ratio_curve(id, g);
            double m = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i)
                m = std::max(m, std::abs(sep.value[i] - ref.value[i]) / std::max(1.0, std::abs(ref.value[i])));
            ch.add(std::string(to_string(id)) + " separatrix = integral ratio", m, 1e-6);
            GeometryReport gr = check_geometry(sys, 200);
            ch.add(std::string(to_string(id)) + " geometry", gr.ok(), gr.ok() ? "ok" : gr.violations.front());
        }
        ch.add("nu = 4h(1 - omega)/(4h + omega)", nu_omega_residual(-0.1), 1e-8);
        ok = ch.all;
        return {ch.table};
    }
    Table sys_t{"systems", {"system", "A", "B1", "B0", "saddle_r", "slope", "transverse_eigenvalue"}, {}};
    Table t{"separatrix", {"system", "h", "separatrix", "ratio", "isocline_low", "isocline_high"}, {}};
    std::vector<double> g = interior_grid(n);
    for (RiccatiId id : ids) {
        RiccatiSystem sys = riccati_system(id);
        sys_t.add({std::string(to_string(id)), sys.A, sys.B1, sys.B0, sys.saddle_r, sys.slope, sys.transverse_eigenvalue()});
        RatioCurve sep = separatrix(sys, g, opt);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto iso = sys.isocline(g[i]);
            t.add({std::string(to_string(id)), g[i], sep.value[i], ratio_from_integrals(id, g[i]), iso[0], iso[1]});
        }
    }
    return {sys_t, t};
}

std::vector<Table> cmd_series(const Common& c, const std::string& end, int terms, bool& ok) {
    if (c.check) {
        CheckList ch;
        CenterCoefficients cc = center_coefficients(40);
        bool closed = true;
        for (int k = 1; k <= 40; ++k) closed = closed && center_closed_form_a(k) == cc.a[k] && center_closed_form_c(k) == cc.c[k];
        ch.add("center coefficients match closed forms (k <= 40)", closed, closed ? "exact" : "differ");
        const auto& cd = center_coefficients_double();
        double worst = 0.0;
        for (double s : {1e-4, 1e-3, 1e-2, 0.05}) {
            auto I = basis_integrals(s - 0.25);
            worst = std::max({worst, std::abs(center_series_derivs(cd[0], s, 0, 0, 20)[0] / I[0] - 1.0),
                              std::abs(center_series_derivs(cd[1], s, 0, 0, 20)[0] / I[2] - 1.0)});
        }
        ch.add("center series vs quadrature", worst, 1e-9);
        SeriesExpansion z = series_at_zero(kMaxZeroTerms);
        auto J = z.evaluate(-1e-3);
        double jz = std::max(std::abs(J[0] - basic_integral(0, {-1e-3}).value / (kC1 * 0.249)),
                             std::abs(J[1] - basic_integral(2, {-1e-3}).value / (kC1 * 0.249)));
        ch.add("saddle-end series vs quadrature", jz, 1e-10);
        ok = ch.all;
        return {ch.table};
    }
    if (end == "center") {
        CenterCoefficients cc = center_coefficients(terms);
        Table t{"center_series", {"k", "a_k", "c_k", "a_k_value", "c_k_value"}, {}};
        for (int k = 1; k <= terms; ++k)
            t.add({static_cast<long long>(k), to_string(cc.a[k]), to_string(cc.c[k]), to_double(cc.a[k]), to_double(cc.c[k])});
        return {t};
    }
    if (end == "zero") {
        SeriesExpansion z = series_at_zero(terms);
        Table t{"zero_series", {"k", "psi0", "psi2", "phi0", "phi2"}, {}};
        auto at = [](const std::vector<Rational>& v, std::size_t k) { return k < v.size() ? to_string(v[k]) : std::string("0"); };
        for (int k = 0; k < terms; ++k)
            t.add({static_cast<long long>(k), at(z.coeffs_I0, k), at(z.coeffs_I2, k), at(z.log_coeffs_I0, k),
                   at(z.log_coeffs_I2, k)});
        return {t};
    }
    throw UsageError("--end must be center or zero");
}

struct SimulateArgs {
    double eps = 1e-3;
    std::string annulus = "right";
    bool cycles = false;
    int extract = 0;
    std::string precision = "double";
    int grid = 120;
    double ode_tol = 1e-13;
    std::vector<double> orbit;
};

std::vector<Table> cmd_simulate(const Common& c, const CoeffSource& src, const LevelGrid& grid, const SimulateArgs& a,
                                bool& ok) {
    if (!(a.eps > 0.0)) throw UsageError("--eps must be positive");
    if (c.check) {
        CheckList ch;
        std::mt19937_64 rng(c.seed);
        double dual = 0.0;
        for (int i = 0; i < 5; ++i) {
            PerturbationCoeffs p = random_coeffs(rng, false);
            double h = -0.24 + 0.23 * i / 4.0;
            double dl = displacement_map(h, p, 1e-2, Annulus::Left).d;
            double dr = displacement_map(h, p.point_reflected(), 1e-2, Annulus::Right).d;
            dual = std::max(dual, std::abs(dl - dr) / std::max(1e-6, std::abs(dr)));
        }
        ch.add("left displacement = right displacement of the point reflection", dual, 1e-9);
        PerturbationCoeffs ham;
        ham.a[0][2] = 1.0, ham.a[2][0] = 1.0, ham.b[1][1] = -2.0;
        double hd = 0.0;
        for (double h : {-0.2, -0.1, -0.02}) hd = std::max(hd, std::abs(displacement_map(h, ham, 0.05, Annulus::Right).d));
        ch.add("Hamiltonian perturbation has zero displacement", hd, 1e-12);
        PerturbationCoeffs g = random_coeffs(rng, false);
        double m1 = 0.0;
        for (double h : {-0.2, -0.1}) {
            double ref = evaluate_envelope(m1_envelope(g), {h});
            m1 = std::max(m1, std::abs(extract_melnikov(h, g, 1, Annulus::Right).value / ref - 1.0));
        }
        ch.add("Richardson extraction recovers M1", m1, 1e-3);
        ok = ch.all;
        return {ch.table};
    }
    if (!src.given()) throw UsageError("simulate needs --coeffs or --coeff");
    PerturbationCoeffs p = src.load();
    if (!a.orbit.empty()) {
        if (a.orbit.size() != 3) throw UsageError("--orbit expects x0 y0 t_end");
        Table t{"orbit", {"t", "x", "y", "H"}, {}};
        for (const auto& s : integrate_orbit(a.orbit[0], a.orbit[1], p, a.eps, a.orbit[2], 200, a.ode_tol))
            t.add({s.t, s.x, s.y, hamiltonian_value(s.x, s.y)});
        return {t};
    }
    if (a.cycles) {
        CycleSearchOptions opt;
        opt.grid = a.grid;
        opt.disp.tol = a.ode_tol;
        Table t{"cycles", {"annulus", "h", "s", "stability", "residual"}, {}};
        for (Annulus an : annuli(a.annulus)) {
            auto found = a.precision == "quad" ? find_limit_cycles<Float128>(p, a.eps, an, opt)
                                               : find_limit_cycles<double>(p, a.eps, an, opt);
            for (const auto& f : found)
                t.add({std::string(to_string(an)), f.h_star, f.h_star + 0.25, std::string(to_string(f.stability)), f.residual});
        }
        return {t};
    }
    if (a.extract > 0) {
        Table t{"extraction", {"annulus", "h", "order", "estimate", "error", "envelope"}, {}};
        for (Annulus an : annuli(a.annulus))
            for (double h : grid.levels(5)) {
                MelnikovEstimate est = extract_melnikov(h, p, a.extract, an, a.eps);
                double env = a.extract <= 3 ? evaluate_envelope(envelope_of_order(p, a.extract, an), {h}) : 0.0;
                t.add({std::string(to_string(an)), h, static_cast<long long>(a.extract), est.value, est.error, env});
            }
        return {t};
    }
    Table t{"displacement", {"annulus", "h", "eps", "d", "return_time"}, {}};
    DisplacementOptions opt;
    opt.tol = a.ode_tol;
    for (Annulus an : annuli(a.annulus))
        for (double h : grid.levels(10)) {
            if (!(h > -0.25 && h < 0.0)) throw UsageError("displacement levels must lie strictly inside (-1/4, 0)");
            DisplacementSample s = a.precision == "quad" ? displacement_map<Float128>(h, p, a.eps, an, opt)
                                                         : displacement_map<double>(h, p, a.eps, an, opt);
            t.add({std::string(to_string(an)), s.h, s.eps, s.d, s.return_time});
        }
    return {t};
}

std::vector<Table> cmd_identities(const Common& c, const LevelGrid& grid, double lambda, double mu, const std::string& only,
                                  bool& ok) {
    const double tol = c.tolerance();
    std::vector<IdentityId> ids;
    for (IdentityId id : kAllIdentities)
        if (only.empty() || only == to_string(id)) ids.push_back(id);
    if (ids.empty()) throw UsageError("unknown identity '" + only + "' (use I-1, II-1 .. II-6, III-1 .. III-5, IV-1 .. IV-3)");
    Table t{"identities", {"id", "lambda", "mu", "annulus", "h", "lhs", "rhs", "residual", "passed"}, {}};
    std::vector<std::pair<double, double>> lm = {{lambda, mu}};
    if (c.check) {
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> U(-2.0, 2.0);
        for (int i = 0; i < 4; ++i) lm.push_back({U(rng), U(rng)});
    }
    bool all = true;
    for (IdentityId id : ids)
        for (auto [L, M] : lm) {
            if (!is_iv_family(id) && (L != lm.front().first || M != lm.front().second)) continue;
            for (Annulus an : {Annulus::Right, Annulus::Left})
                for (double h : grid.levels(10)) {
                    IdentityResidual r = verify_identity(id, {h, an}, L, M, tol);
                    bool pass = r.residual <= 1e-8 * std::max(1.0, std::abs(r.lhs));
                    all = all && pass;
                    t.add({std::string(to_string(id)), L, M, std::string(to_string(an)), h, r.lhs, r.rhs, r.residual,
                           std::string(pass ? "yes" : "no")});
                }
        }
    if (!c.check) return {t};
    CheckList ch;
    ch.add("all identities hold on the ovals", all, all ? "ok" : "see identities table");
    double ex = 0.0;
    for (IdentityId id : ids)
        for (auto [L, M] : lm) ex = std::max(ex, identity_exactness_residual(id, 0.3, -0.2, 0.7, L, M));
    ch.add("remainders are exact forms (circle integrals)", ex, 1e-11);
    ok = ch.all;
    return {ch.table, t};
}

std::vector<Table> cmd_darboux(const Common& c, const CoeffSource& src, double eps, int npoints, bool& ok) {
    if (c.check) {
        CheckList ch;
        PerturbationCoeffs ex = darboux_example();
        SaddleCheck sc = darboux_example_saddle_check();
        ch.add("example saddle at (0, -1/11)", sc.field_norm, 1e-14);
        ch.add("example loop level 112/9", sc.level_gap, 1e-12);
        double drift = 0.0;
        for (auto [x0, y0] : {std::pair{0.0, 0.5}, std::pair{0.3, -0.5}}) {
            double H0 = darboux_example_integral(x0, y0);
            for (const auto& s : integrate_orbit(x0, y0, ex, 1.0, 2.0, 50, 1e-14))
                drift = std::max(drift, std::abs(darboux_example_integral(s.x, s.y) / H0 - 1.0));
        }
        ch.add("example first integral constant along orbits", drift, 1e-8);
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> U(-1.5, 1.5);
        DarbouxIntegral D = darboux_parameters(ex, 1.0);
        std::vector<std::array<double, 2>> pts;
        while (pts.size() < 100) {
            double x = U(rng), y = U(rng);
            if (std::abs(D.F1(x, y)) > 1e-3 && std::abs(D.F2(x, y)) > 1e-3) pts.push_back({x, y});
        }
        ch.add("example gradient orthogonality", darboux_residual(ex, 1.0, pts), 1e-12);
        ok = ch.all;
        return {ch.table};
    }
    PerturbationCoeffs p = src.given() ? src.load() : darboux_example();
    DarbouxIntegral D = darboux_parameters(p, eps);
    Table par{"darboux", {"variant", "parameter", "real", "imag"}, {}};
    const std::pair<const char*, std::complex<double>> fields[] = {{"A1", D.A1}, {"A2", D.A2}, {"B1", D.B1}, {"B2", D.B2},
                                                                   {"C1", D.C1}, {"C2", D.C2}, {"n1", D.n1}, {"n2", D.n2}};
    for (auto [name, v] : fields) par.add({std::string(to_string(D.variant)), std::string(name), v.real(), v.imag()});
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    std::vector<std::array<double, 2>> pts;
    for (int guard = 0; static_cast<int>(pts.size()) < npoints && guard < 100 * npoints; ++guard) {
        double x = U(rng), y = U(rng);
        if (std::abs(D.F1(x, y)) > 1e-3 && std::abs(D.F2(x, y)) > 1e-3) pts.push_back({x, y});
    }
    Table res{"residual", {"points", "max_residual"}, {}};
    res.add({static_cast<long long>(pts.size()), darboux_residual(p, eps, pts)});
    return {par, res};
}

std::vector<Table> cmd_theorem4(const Common& c, const std::string& target, double eps, bool simulate, int grid,
                                std::vector<double> levels, bool& ok) {
    Theorem4Target t = parse_target(target);
    Theorem4Construction con = theorem4_construction(t);
    if (levels.empty()) levels = default_ladder_levels(t);
    RationalEnvelope e = theorem4_ladder(con, levels);
    Table base{"base", {"parameter", "exact", "value"}, {}};
    auto addq = [&](const char* name, const Rational& q) { base.add({std::string(name), to_string(q), to_double(q)}); };
    addq("alpha0_bar", con.alpha0_bar);
    addq("alpha1", con.base.alpha1);
    addq("beta0_bar", con.beta0_bar);
    addq("beta1", con.base.beta1);
    addq("gamma0_bar", con.gamma0_bar);
    addq("gamma1", con.base.gamma1);
    addq("leading", con.leading);
    Table ladder{"ladder", {"k", "level_s", "delta_k"}, {}};
    auto d = ladder_deltas(e, con.n_conditions);
    for (int k = 0; k < con.n_conditions; ++k) ladder.add({static_cast<long long>(k + 1), levels[k], to_double(d[k])});
    Table zeros{"envelope_zeros", {"annulus", "count", "levels_s"}, {}};
    int counts[2];
    for (Annulus an : {Annulus::Right, Annulus::Left}) {
        ZeroReport z = count_envelope_zeros(e, an);
        std::vector<double> s;
        for (const Zero& q : z.zeros) s.push_back(q.h + 0.25);
        counts[an == Annulus::Right ? 0 : 1] = z.count_with_multiplicity;
        zeros.add({std::string(to_string(an)), static_cast<long long>(z.count_with_multiplicity), join(s)});
    }
    std::vector<Table> out = {base, ladder, zeros};
    CheckList ch;
    ch.add("envelope zeros match " + target, counts[0] == con.expected_right && counts[1] == con.expected_left,
           std::to_string(counts[0]) + "+" + std::to_string(counts[1]));
    if (simulate) {
        ConstructionCycles sim = simulate_construction(t, eps, grid);
        Table cyc{"cycles", {"annulus", "h", "s", "stability", "residual"}, {}};
        for (const auto* v : {&sim.right, &sim.left})
            for (const auto& f : *v)
                cyc.add({std::string(to_string(f.annulus)), f.h_star, f.h_star + 0.25, std::string(to_string(f.stability)),
                         f.residual});
        Table summary{"cycle_counts", {"target", "eps", "right", "left"}, {}};
        summary.add({target, eps, static_cast<long long>(sim.right.size()), static_cast<long long>(sim.left.size())});
        out.push_back(summary);
        out.push_back(cyc);
        ch.add("simulated cycles match " + target,
               static_cast<int>(sim.right.size()) == con.expected_right && static_cast<int>(sim.left.size()) == con.expected_left,
               std::to_string(sim.right.size()) + "+" + std::to_string(sim.left.size()));
    }
    if (c.check) {
        auto m = small_amplitude_coeffs(con.base, con.n_conditions + 1);
        bool vanish = true;
        for (int k = 1; k <= con.n_conditions; ++k) vanish = vanish && m[k] == 0;
        ch.add("base expansion vanishes to order " + std::to_string(con.n_conditions), vanish, to_string(con.leading));
        ok = ch.all;
        out.insert(out.begin(), ch.table);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Abelian integrals, Melnikov envelopes and limit cycles near the eight-loop"};
    app.require_subcommand(1);
    app.fallthrough(false);

    Common common;
    CoeffSource src;
    LevelGrid grid;

    auto* integrals = app.add_subcommand("integrals", "Table of I_k(h)");
    int kmax = 2;
    std::string which = "right";
    integrals->add_option("--kmax", kmax, "Largest k")->check(CLI::Range(0, 8));
    integrals->add_option("--annulus", which, "right, left or both");

    auto* envelope = app.add_subcommand("envelope", "Melnikov envelope of a perturbation");
    int order = 2;
    envelope->add_option("--order", order, "Order 1..4")->check(CLI::Range(1, 4));
    envelope->add_option("--annulus", which, "right, left or both");

    auto* zeros = app.add_subcommand("zeros", "Zeros of a second-order envelope on both annuli");
    std::vector<double> env_list;
    zeros->add_option("--envelope", env_list, "alpha0 alpha1 beta0 beta1 gamma0 gamma1");

    auto* dist = app.add_subcommand("distribution", "Search for a zero distribution or sample random caps");
    std::string split = "3+3";
    int budget = 2000, random = 0;
    bool freeze_beta = false;
    dist->add_option("--target", split, "Distribution R+L");
    dist->add_option("--budget", budget, "Search evaluations")->check(CLI::PositiveNumber);
    dist->add_flag("--freeze-beta", freeze_beta, "Keep beta0 = beta1 = 0");
    dist->add_option("--random", random, "Sample this many random envelopes instead of searching")->check(CLI::NonNegativeNumber);

    auto* ric = app.add_subcommand("riccati", "Separatrices of the projectivized flows");
    std::string system = "all";
    int npts = 50;
    double delta = 1e-8;
    ric->add_option("--system", system, "nu, omega, u, v, w or all");
    ric->add_option("--n", npts, "Grid points")->check(CLI::Range(2, 100000));
    ric->add_option("--delta", delta, "Launch offset from the saddle")->check(CLI::Range(1e-14, 1e-3));

    auto* series = app.add_subcommand("series", "Exact series coefficients");
    std::string end = "center";
    int terms = 10;
    series->add_option("--end", end, "center or zero");
    series->add_option("--terms", terms, "Number of terms")->check(CLI::Range(1, 64));

    auto* sim = app.add_subcommand("simulate", "Displacement map, cycles and Melnikov extraction");
    SimulateArgs sa;
    sim->add_option("--eps", sa.eps, "Perturbation size");
    sim->add_option("--annulus", sa.annulus, "right, left or both");
    sim->add_flag("--cycles", sa.cycles, "Locate limit cycles");
    sim->add_option("--extract", sa.extract, "Extract M_k by Richardson extrapolation from eps downwards")
        ->check(CLI::Range(1, 3));
    sim->add_option("--precision", sa.precision, "double or quad")->check(CLI::IsMember({"double", "quad"}));
    sim->add_option("--cycle-grid", sa.grid, "Scan points for --cycles")->check(CLI::Range(4, 100000));
    sim->add_option("--ode-tol", sa.ode_tol, "Integrator tolerance")->check(CLI::PositiveNumber);
    sim->add_option("--orbit", sa.orbit, "x0 y0 t_end: sample one trajectory");

    auto* ids = app.add_subcommand("identities", "Integral identities as cycle-integral equalities");
    double lambda = 1.0, mu = 0.0;
    std::string only;
    ids->add_option("--lambda", lambda, "lambda in q1 = -(2 lambda x + mu x^2)");
    ids->add_option("--mu", mu, "mu in q1");
    ids->add_option("--id", only, "Run a single identity, e.g. II-3");

    auto* darb = app.add_subcommand("darboux", "Darboux first integral of a system reversible in x");
    double deps = 1.0;
    int dpoints = 100;
    darb->add_option("--eps", deps, "Perturbation size");
    darb->add_option("--points", dpoints, "Random sample points")->check(CLI::Range(1, 1000000));

    auto* t4 = app.add_subcommand("theorem4", "Small-amplitude constructions 5+0, 3+3, 4+1");
    std::string target;
    double t4eps = 1e-3;
    bool t4sim = false;
    int t4grid = 60;
    std::vector<double> t4levels;
    t4->add_option("--target", target, "5+0, 3+3 or 4+1")->required();
    t4->add_option("--eps", t4eps, "Perturbation size for --simulate")->check(CLI::PositiveNumber);
    t4->add_flag("--simulate", t4sim, "Count limit cycles with the simulator");
    t4->add_option("--cycle-grid", t4grid, "Scan points per annulus")->check(CLI::Range(4, 100000));
    t4->add_option("--levels", t4levels, "Ladder levels s_i in (0, 1/4)");

    for (CLI::App* s : {integrals, envelope, zeros, dist, ric, series, sim, ids, darb, t4}) common.attach(s);
    for (CLI::App* s : {envelope, zeros, sim, darb}) src.attach(s);
    for (CLI::App* s : {integrals, envelope, sim, ids}) grid.attach(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        bool ok = true;
        std::vector<Table> tables;
        CLI::App* chosen = app.get_subcommands().front();
        const std::string name = chosen->get_name();
        if (chosen == integrals) tables = cmd_integrals(common, grid, kmax, which, ok);
        else if (chosen == envelope) tables = cmd_envelope(common, src, grid, order, which, ok);
        else if (chosen == zeros) tables = cmd_zeros(common, src, env_list, ok);
        else if (chosen == dist) tables = cmd_distribution(common, split, budget, freeze_beta, random, ok);
        else if (chosen == ric) tables = cmd_riccati(common, system, npts, delta, ok);
        else if (chosen == series) tables = cmd_series(common, end, terms, ok);
        else if (chosen == sim) tables = cmd_simulate(common, src, grid, sa, ok);
        else if (chosen == ids) tables = cmd_identities(common, grid, lambda, mu, only, ok);
        else if (chosen == darb) tables = cmd_darboux(common, src, deps, dpoints, ok);
        else if (chosen == t4) tables = cmd_theorem4(common, target, t4eps, t4sim, t4grid, t4levels, ok);
        common.out.emit(name, tables);
        if (!ok) {
            std::cerr << "eightloop " << name << ": check failed\n";
            return 1;
        }
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "eightloop: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "eightloop: " << e.what() << "\n";
        return 1;
    }
}
