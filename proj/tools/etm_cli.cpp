// etm_cli: command-line front end. Every command prints a provenance header and one or more
// CSV sections to stdout; with --out DIR (or ETM_OUT) the same text goes to DIR/<command>.csv.
#include <etm/etm.hpp>

#include "CLI11.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace etm;

namespace {

struct RunConfig {
    std::string rule = "lattes:2";
    std::string phi = "const:1";
    std::string out_dir;
    double Lambda = 2.0;
    double alpha = 1.0;
    double tol = 1e-12;
    std::size_t max_cells = 2'000'000;
    int max_period = 12;
    unsigned seed = 1;

    void check() const {
        if (!(Lambda > 1.0)) throw std::invalid_argument("--Lambda must exceed 1");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("--alpha must lie in (0, 1]");
        if (!(tol > 0.0)) throw std::invalid_argument("--tol must be positive");
        if (max_cells == 0 || max_period <= 0) throw std::invalid_argument("caps must be positive");
    }
};

std::string fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string num(double x) {
    std::ostringstream o;
    o << std::setprecision(15) << x;
    return o.str();
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

SubdivisionRule load_rule(const std::string& src) {
    if (src.rfind("lattes:", 0) == 0) return lattes_rule(std::stoi(src.substr(7)));
    return parse_rule(read_file(src));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

Potential load_potential(const Model& M, const std::string& spec) {
    auto f = split(spec, ':');
    if (f.empty()) throw std::invalid_argument("empty potential spec");
    if (f[0] == "const" && f.size() == 2) return Potential::constant(M, parse_rational(f[1]));
    if (f[0] == "indicator" && f.size() == 3) return Potential::indicator(M, M.tile_index(f[1]), parse_rational(f[2]));
    if (f[0] == "table" && f.size() >= 2) return Potential::parse_table(M, read_file(spec.substr(6)));
    if (f[0] == "cobound" && f.size() >= 3) {
        auto beta = Potential::parse_table(M, read_file(spec.substr(spec.find(':', 8) + 1)));
        return Potential::coboundary(parse_rational(f[1]), beta);
    }
    throw std::invalid_argument("bad potential spec '" + spec +
                                "' (const:c, indicator:tile:value, table:path, cobound:c:path)");
}

// "re" or "re,im"
cplx parse_complex(const std::string& s) {
    auto f = split(s, ',');
    if (f.size() == 1) return {std::stod(f[0]), 0.0};
    if (f.size() == 2) return {std::stod(f[0]), std::stod(f[1])};
    throw std::invalid_argument("bad complex value '" + s + "' (re or re,im)");
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    for (const auto& x : split(s, ',')) v.push_back(std::stod(x));
    return v;
}

class Report {
public:
    Report(std::string cmd, const RunConfig& cfg) : cmd_(std::move(cmd)), cfg_(cfg) {}

    void param(const std::string& k, const std::string& v) { params_.emplace_back(k, v); }
    void rule_hash(const std::string& h) { rule_hash_ = h; }
    void phi_info(const std::string& s) { phi_ = s; }

    void section(const std::string& name, const std::vector<std::string>& cols) {
        body_ << "# section: " << name << "\n";
        for (std::size_t i = 0; i < cols.size(); ++i) body_ << (i ? "," : "") << cols[i];
        body_ << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) body_ << (i ? "," : "") << cells[i];
        body_ << "\n";
    }
    void kv(const std::string& k, const std::string& v) { row({k, v}); }

    std::string text() const {
        std::ostringstream o;
        o << "# etm_cli " << ETM_VERSION << "\n# command: " << cmd_ << "\n# rule: " << cfg_.rule;
        if (!rule_hash_.empty()) o << " fnv1a=" << rule_hash_;
        o << "\n";
        if (!phi_.empty()) o << "# phi: " << phi_ << "\n";
        o << "# params:";
        for (const auto& [k, v] : params_) o << " " << k << "=" << v;
        o << "\n" << body_.str();
        return o.str();
    }

    void emit() const {
        auto t = text();
        std::cout << t;
        if (!cfg_.out_dir.empty()) {
            std::filesystem::create_directories(cfg_.out_dir);
            std::ofstream f(std::filesystem::path(cfg_.out_dir) / (cmd_ + ".csv"), std::ios::binary);
            if (!f) throw std::runtime_error("cannot write to " + cfg_.out_dir);
            f << t;
        }
    }

private:
    std::string cmd_;
    const RunConfig& cfg_;
    std::string rule_hash_, phi_;
    std::vector<std::pair<std::string, std::string>> params_;
    std::ostringstream body_;
};

struct Loaded {
    Model M;
    Potential phi;  // holds a pointer to M
    Loaded(SubdivisionRule r, const std::string& spec) : M(std::move(r)), phi(load_potential(M, spec)) {}
};

// model + potential, with the provenance lines filled in
std::unique_ptr<Loaded> load(const RunConfig& cfg, Report& rep, bool want_phi = true) {
    auto rule = load_rule(cfg.rule);
    rep.rule_hash(fnv1a(rule.serialize()));
    auto L = std::make_unique<Loaded>(std::move(rule), want_phi ? cfg.phi : "const:0");
    if (want_phi)
        rep.phi_info(cfg.phi + " depth=" + std::to_string(L->phi.depth()) + " fnv1a=" + fnv1a(L->phi.serialize()));
    return L;
}

std::string pass(bool b) { return b ? "PASS" : "FAIL"; }

// ---------------- commands ----------------

int cmd_validate(const RunConfig& cfg) {
    Report rep("validate", cfg);
    auto rule = load_rule(cfg.rule);
    rep.rule_hash(fnv1a(rule.serialize()));
    auto vr = validate_rule(rule);
    rep.section("checks", {"check", "result", "witness"});
    for (const auto& c : vr.checks) {
        std::string w = c.witness;
        for (auto& ch : w)
            if (ch == ',' || ch == '\n') ch = ';';
        rep.row({c.name, pass(c.pass), w});
    }
    rep.section("summary", {"key", "value"});
    rep.kv("valid", vr.ok() ? "true" : "false");
    if (vr.ok()) {
        auto an = analyze_rule(rule);
        rep.kv("post_count", std::to_string(an.m));
        rep.kv("degree", std::to_string(an.deg));
    }
    rep.emit();
    if (!vr.ok()) throw InvalidRule(vr);
    return 0;
}

int cmd_levels(const RunConfig& cfg, int n_max, int dn) {
    Report rep("levels", cfg);
    rep.param("n", std::to_string(n_max));
    rep.param("dn", std::to_string(dn));
    rep.param("max_cells", std::to_string(cfg.max_cells));
    auto L = load(cfg, rep, false);
    Hierarchy H(L->M, cfg.max_cells);
    rep.section("cells", {"n", "tiles", "edges", "vertices", "expected_tiles", "expected_edges", "result"});
    long long d = 1;
    for (int n = 0; n <= n_max; ++n) {
        const auto& lv = H.level(n);
        const long long et = 2 * d, ee = static_cast<long long>(L->M.m) * d;
        rep.row({std::to_string(n), std::to_string(lv.tiles()), std::to_string(lv.edges()), std::to_string(lv.vertices()),
                 std::to_string(et), std::to_string(ee), pass(lv.tiles() == et && lv.edges() == ee)});
        d *= L->M.deg;
    }
    if (dn > 0) {
        auto r = Dn_and_lambda0(H, dn);
        rep.section("Dn", {"n", "Dn"});
        for (const auto& row : r.rows) rep.row({std::to_string(row.n), std::to_string(row.Dn)});
        rep.section("summary", {"key", "value"});
        rep.kv("lambda0", num(r.lambda0));
    }
    rep.emit();
    return 0;
}

int cmd_shifts(const RunConfig& cfg, int n_max) {
    Report rep("shifts", cfg);
    rep.param("n", std::to_string(n_max));
    auto L = load(cfg, rep, false);
    const auto& M = L->M;
    auto T = tile_shift(M), EC = edge_color_shift(M), E = edge_shift(M);
    rep.section("systems", {"system", "states", "mixing"});
    rep.row({"tile", std::to_string(T.size()), is_topologically_mixing(T) ? "true" : "false"});
    rep.row({"edge-color", std::to_string(EC.size()), is_topologically_mixing(EC) ? "true" : "false"});
    rep.row({"edge", std::to_string(E.size()), is_topologically_mixing(E) ? "true" : "false"});
    rep.section("traces", {"n", "tile", "edge-color", "edge"});
    for (int n = 1; n <= n_max; ++n)
        rep.row({std::to_string(n), std::to_string(trace_power(T, n)), std::to_string(trace_power(EC, n)),
                 std::to_string(trace_power(E, n))});
    rep.emit();
    return 0;
}

int cmd_orbits(const RunConfig& cfg, int n_max, int p_max, const std::string& ledger_path, bool hcheck) {
    Report rep("orbits", cfg);
    rep.param("n", std::to_string(n_max));
    rep.param("p_max", std::to_string(p_max));
    rep.param("horizon_check", hcheck ? "on" : "off");
    auto L = load(cfg, rep);
    const auto& M = L->M;
    rep.section("fixed_points", {"n", "points", "weighted", "expected", "identity"});
    BigInt d = 1;
    bool all = true;
    for (int n = 1; n <= n_max; ++n) {
        d *= M.deg;
        FixedPointLedger F(M, n, true);
        auto c = verify_counting_identity(F);
        BigInt expect = d + 1;
        bool ok = c.all_pass && BigInt(F.weighted_count()) == expect;
        all = all && ok;
        std::ostringstream e;
        e << expect;
        rep.row({std::to_string(n), std::to_string(F.points().size()), std::to_string(F.weighted_count()), e.str(),
                 pass(c.all_pass)});
    }
    if (p_max > 0) {
        if (p_max > cfg.max_period) throw std::invalid_argument("--p-max exceeds --max-period");
        auto O = primitive_orbits(L->phi, p_max);
        rep.section("ledger", {"key", "value"});
        rep.kv("orbits", std::to_string(O.orbits.size()));
        rep.kv("horizon", num(O.horizon));
        if (hcheck) {
            auto h = horizon_check(L->phi, O);
            rep.kv("horizon_check", pass(h.ok()) + " period=" + std::to_string(h.period) + " scanned=" +
                                        std::to_string(h.scanned) + " below=" + std::to_string(h.below));
            all = all && h.ok();
        }
        if (!ledger_path.empty()) export_ledger(O, ledger_path);
    }
    rep.emit();
    return all ? 0 : 1;
}

int cmd_pressure(const RunConfig& cfg, const std::string& ts, int n_periodic) {
    Report rep("pressure", cfg);
    rep.param("t", ts);
    rep.param("periodic_n", std::to_string(n_periodic));
    auto L = load(cfg, rep);
    ThermoConfig tc;
    tc.tolerance = cfg.tol;
    auto grid = parse_list(ts);
    rep.section("pressure", n_periodic > 0 ? std::vector<std::string>{"t", "P", "residual", "periodic", "difference"}
                                           : std::vector<std::string>{"t", "P", "residual"});
    std::vector<std::pair<double, double>> curve;
    for (double t : grid) {
        auto p = pressure_ex(L->phi, t, tc);
        curve.emplace_back(t, p.P);
        if (n_periodic > 0) {
            double q = periodic_pressure(L->phi, n_periodic, t);
            rep.row({num(t), num(p.P), num(p.residual), num(q), num(std::abs(q - p.P))});
        } else {
            rep.row({num(t), num(p.P), num(p.residual)});
        }
    }
    std::sort(curve.begin(), curve.end());
    rep.section("summary", {"key", "value"});
    // P(-t phi) decreasing in t is the same as P(t phi) increasing
    std::vector<std::pair<double, double>> flipped;
    for (auto [t, p] : curve) flipped.emplace_back(-t, p);
    std::sort(flipped.begin(), flipped.end());
    rep.kv("P(-t phi) strictly decreasing", strictly_decreasing(flipped) ? "true" : "false");
    rep.emit();
    return 0;
}

int cmd_s0(const RunConfig& cfg) {
    Report rep("s0", cfg);
    rep.param("tol", num(cfg.tol));
    auto L = load(cfg, rep);
    auto r = s0_ex(L->phi, cfg.tol);
    rep.section("summary", {"key", "value"});
    rep.kv("s0", num(r.s0));
    rep.section("samples", {"t", "P(-t phi)"});
    for (auto [t, p] : r.samples) rep.row({num(t), num(p)});
    rep.emit();
    return 0;
}

int cmd_zeta(const RunConfig& cfg, const std::string& sys, const std::string& s, int N, const std::string& weight) {
    Report rep("zeta", cfg);
    rep.param("system", sys);
    rep.param("s", s);
    rep.param("N", std::to_string(N));
    rep.param("weight", weight);
    auto L = load(cfg, rep);
    if (weight != "one" && weight != "deg") throw std::invalid_argument("--weight must be one or deg");
    ZetaData Z(L->phi);
    auto r = zeta_log_truncated(Z, parse_system(sys), parse_complex(s), N, weight == "deg" ? ZWeight::deg : ZWeight::one);
    rep.section("terms", {"n", "re", "im", "abs_over_n"});
    for (const auto& t : r.terms) rep.row({std::to_string(t.n), num(t.Z.real()), num(t.Z.imag()), num(t.abs_over_n)});
    rep.section("summary", {"key", "value"});
    rep.kv("log_zeta_re", num(r.log_sum.real()));
    rep.kv("log_zeta_im", num(r.log_sum.imag()));
    rep.kv("tail_ratio", r.tail_ratio ? num(*r.tail_ratio) : "n/a");
    rep.kv("diverging", r.diverging ? "true" : "false");
    rep.emit();
    return 0;
}

int cmd_factorize(const RunConfig& cfg, int N, const std::vector<std::string>& ss, double tol) {
    Report rep("factorize", cfg);
    rep.param("N", std::to_string(N));
    rep.param("tol", num(tol));
    auto L = load(cfg, rep);
    std::vector<cplx> grid;
    for (const auto& s : ss) grid.push_back(parse_complex(s));
    if (grid.empty()) {
        const double s = s0(L->phi);
        grid = {{s - 0.3, 0}, {s - 0.3, 1}, {s + 0.3, 0}, {s + 0.3, 1}, {s, 1}};
    }
    std::string gs;
    for (auto z : grid) gs += (gs.empty() ? "" : ";") + num(z.real()) + "," + num(z.imag());
    rep.param("s", gs);
    ZetaData Z(L->phi);
    auto r = verify_factorization(Z, grid, N, tol);
    rep.section("residuals", {"s_re", "s_im", "n", "lhs_re", "lhs_im", "residual", "result"});
    for (const auto& row : r.rows)
        rep.row({num(row.s.real()), num(row.s.imag()), std::to_string(row.n), num(row.lhs.real()), num(row.lhs.imag()),
                 num(row.error), pass(row.pass)});
    rep.section("summary", {"key", "value"});
    rep.kv("result", pass(r.all_pass));
    rep.emit();
    return r.all_pass ? 0 : 1;
}

int cmd_curvegap(const RunConfig& cfg, double t) {
    Report rep("curvegap", cfg);
    rep.param("t", num(t));
    auto L = load(cfg, rep);
    auto r = pressure_on_curve(L->phi, t);
    rep.section("summary", {"key", "value"});
    rep.kv("P", num(r.P));
    rep.kv("P_curve", num(r.P_curve));
    rep.kv("gap", num(r.gap));
    rep.emit();
    return 0;
}

int cmd_em(const RunConfig& cfg, int m, int n, int runs, bool greedy) {
    Report rep("em", cfg);
    rep.param("m", std::to_string(m));
    rep.param("n", std::to_string(n));
    rep.param("runs", std::to_string(runs));
    rep.param("greedy", greedy ? "on" : "off");
    rep.param("seed", std::to_string(cfg.seed));
    auto L = load(cfg, rep, false);
    CurveCircle C(L->M);
    std::mt19937_64 rng(cfg.seed);
    rep.section("runs", {"run", "max_card", "bound", "first_le_2", "doubling", "within_bound"});
    int violations = 0;
    std::size_t worst = 0;
    for (int r = 0; r < runs; ++r) {
        auto c = random_Em_run(C, m, n, rng, greedy);
        violations += !c.within_bound;
        worst = std::max(worst, c.max_card);
        rep.row({std::to_string(r), std::to_string(c.max_card), num(c.bound), c.first_le_2 ? "true" : "false",
                 c.doubling ? "true" : "false", c.within_bound ? "true" : "false"});
    }
    rep.section("summary", {"key", "value"});
    rep.kv("violations", std::to_string(violations));
    rep.kv("max_card", std::to_string(worst));
    rep.emit();
    return violations == 0 ? 0 : 1;
}

int cmd_nli(const RunConfig& cfg, long budget, int coh_n) {
    Report rep("nli", cfg);
    rep.param("budget", std::to_string(budget));
    rep.param("cohomology_n", std::to_string(coh_n));
    auto L = load(cfg, rep);
    const auto& M = L->M;
    auto v = nli_test(L->phi, budget);
    auto c = cohomology_test(L->phi, coh_n);
    rep.section("summary", {"key", "value"});
    rep.kv("samples", std::to_string(v.samples));
    rep.kv("skipped", std::to_string(v.skipped));
    rep.kv("integrable_on_samples", v.integrable_on_samples ? "true" : "false");
    if (v.witness) {
        const auto& w = *v.witness;
        rep.kv("witness_xi", M.word_string(w.xi));
        rep.kv("witness_eta", M.word_string(w.eta));
        rep.kv("witness_x", M.word_string(w.x.pre) + "|" + M.word_string(w.x.per));
        rep.kv("witness_y", M.word_string(w.y.pre) + "|" + M.word_string(w.y.per));
        rep.kv("temporal_distance", to_string(w.value));
    }
    rep.kv("cohomologous_constant", c.K ? to_string(*c.K) : "none");
    if (!c.K) {
        rep.kv("cohomology_witness_a", c.witness_a + " avg=" + to_string(c.avg_a));
        rep.kv("cohomology_witness_b", c.witness_b + " avg=" + to_string(c.avg_b));
    }
    rep.emit();
    return 0;
}

int cmd_sni(const RunConfig& cfg, SniParams p, int dn) {
    Report rep("sni", cfg);
    p.metric.Lambda = cfg.Lambda;
    p.metric.alpha = cfg.alpha;
    rep.param("Lambda", num(cfg.Lambda));
    rep.param("alpha", num(cfg.alpha));
    rep.param("N0", std::to_string(p.N0));
    rep.param("span", std::to_string(p.span));
    rep.param("M0", std::to_string(p.M0));
    rep.param("M_max", std::to_string(p.M_max));
    rep.param("epsilon", num(p.epsilon));
    rep.param("dn", std::to_string(dn));
    auto L = load(cfg, rep);
    Hierarchy H(L->M, cfg.max_cells);
    if (dn > 0) p.lambda0 = Dn_and_lambda0(H, dn).lambda0;
    WordCodec codec(L->M);
    std::vector<Word> cands;
    for (std::uint64_t r = 0; r < codec.total(p.M0); ++r) cands.push_back(codec.decode(r, p.M0));
    auto s = sni_probe(H, L->phi, p, cands);
    rep.section("rows", {"candidate", "M", "N", "tile", "branch1", "branch2", "ratio"});
    for (const auto& r : s.rows)
        rep.row({r.candidate, std::to_string(r.M), std::to_string(r.N), r.tile, r.branch1, r.branch2, num(r.ratio)});
    rep.section("summary", {"key", "value"});
    rep.kv("floor", num(s.floor));
    rep.kv("clears_epsilon", s.clears ? "true" : "false");
    if (dn > 0) rep.kv("lambda0", num(p.lambda0));
    rep.kv("lambda_warning", s.lambda_warning ? "true" : "false");
    rep.emit();
    return 0;
}

int cmd_pot(const RunConfig& cfg, int p_max, const std::string& grid_s, const std::string& ledger_path, bool hcheck,
            int coh_n) {
    Report rep("pot", cfg);
    rep.param("p_max", std::to_string(p_max));
    rep.param("horizon_check", hcheck ? "on" : "off");
    rep.param("cohomology_n", std::to_string(coh_n));
    auto L = load(cfg, rep);
    if (p_max > cfg.max_period) throw std::invalid_argument("--p-max exceeds --max-period");
    auto O = ledger_path.empty() || !std::filesystem::exists(ledger_path) ? primitive_orbits(L->phi, p_max)
                                                                           : import_ledger(ledger_path);
    std::vector<double> grid;
    if (grid_s.empty()) {
        for (int T = 1; T <= static_cast<int>(std::floor(O.horizon + 1e-12)); ++T) grid.push_back(T);
    } else {
        grid = parse_list(grid_s);
    }
    std::string gs;
    for (double T : grid) gs += (gs.empty() ? "" : ";") + num(T);
    rep.param("grid", gs);
    auto r = pot_report(L->phi, O, grid, coh_n);
    rep.section("table", {"T", "pi", "Li", "ratio"});
    for (const auto& row : r.rows)
        rep.row({num(row.T), std::to_string(row.pi), row.Li ? num(*row.Li) : "n/a", row.ratio ? num(*row.ratio) : "n/a"});
    rep.section("summary", {"key", "value"});
    rep.kv("s0", num(r.s0));
    rep.kv("horizon", num(r.horizon));
    rep.kv("orbits", std::to_string(O.orbits.size()));
    rep.kv("distinct_lengths", std::to_string(r.distinct_lengths));
    rep.kv("lattice", r.lattice ? "true" : "false");
    rep.kv("K", r.K ? to_string(*r.K) : "none");
    rep.kv("trend_slope", r.trend_slope ? num(*r.trend_slope) : "n/a");
    rep.kv("trend_residual", r.trend_residual ? num(*r.trend_residual) : "n/a");
    rep.kv("note", r.lattice ? "lengths lie on the lattice K*period; the ratio trend is not meaningful"
                             : "desk-scale T; the trend is indicative only");
    bool ok = true;
    if (hcheck) {
        auto h = horizon_check(L->phi, O);
        rep.kv("horizon_check", pass(h.ok()) + " period=" + std::to_string(h.period) + " scanned=" +
                                    std::to_string(h.scanned) + " below=" + std::to_string(h.below));
        ok = h.ok();
    }
    if (!ledger_path.empty() && !std::filesystem::exists(ledger_path)) export_ledger(O, ledger_path);
    rep.emit();
    return ok ? 0 : 1;
}

std::string json_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '"': o += "\\\""; break;
            case '\\': o += "\\\\"; break;
            case '\n': o += "\\n"; break;
            case '\t': o += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char b[8];
                    std::snprintf(b, sizeof b, "\\u%04x", c);
                    o += b;
                } else {
                    o += c;
                }
        }
    }
    return o;
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const RuleParseError*>(&e)) return "rule_parse";
    if (dynamic_cast<const InvalidRule*>(&e)) return "invalid_rule";
    if (dynamic_cast<const HorizonError*>(&e)) return "horizon";
    if (dynamic_cast<const ResourceCap*>(&e)) return "resource_cap";
    if (dynamic_cast<const NonMixing*>(&e)) return "non_mixing";
    if (dynamic_cast<const NoConvergence*>(&e)) return "no_convergence";
    if (dynamic_cast<const FitDegenerate*>(&e)) return "fit_degenerate";
    if (dynamic_cast<const NotEventuallyPositive*>(&e)) return "not_eventually_positive";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
    if (dynamic_cast<const std::domain_error*>(&e)) return "domain_error";
    return "error";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expanding Thurston maps from two-tile subdivision rules"};
    app.require_subcommand(1);
    RunConfig cfg;
    if (const char* env = std::getenv("ETM_OUT")) cfg.out_dir = env;

    auto common = [&](CLI::App* c, bool phi) {
        c->add_option("rule", cfg.rule, "rule file or lattes:k")->required();
        if (phi) c->add_option("--phi", cfg.phi, "potential: const:c, indicator:tile:v, table:path, cobound:c:path");
        c->add_option("--out", cfg.out_dir, "also write <command>.csv into this directory");
        c->add_option("--tol", cfg.tol, "numerical tolerance");
        c->add_option("--max-cells", cfg.max_cells, "cell cap for level construction");
        c->add_option("--max-period", cfg.max_period, "cap on ledger periods");
        c->add_option("--seed", cfg.seed, "seed for randomized sweeps");
        c->add_option("--Lambda", cfg.Lambda, "visual metric expansion factor");
        c->add_option("--alpha", cfg.alpha, "Holder exponent");
    };

    auto* v = app.add_subcommand("validate", "check a rule file");
    common(v, false);

    int lv_n = 4, lv_dn = 0;
    auto* lv = app.add_subcommand("levels", "cell counts of the refinements");
    common(lv, false);
    lv->add_option("--n", lv_n, "deepest level");
    lv->add_option("--dn", lv_dn, "also compute D_n up to this level");

    int sh_n = 6;
    auto* sh = app.add_subcommand("shifts", "the three subshifts and their traces");
    common(sh, false);
    sh->add_option("--n", sh_n, "largest period");

    int or_n = 5, or_p = 0;
    std::string or_ledger;
    bool or_hc = false;
    auto* orb = app.add_subcommand("orbits", "fixed points of f^n and the primitive orbit ledger");
    common(orb, true);
    orb->add_option("--n", or_n, "largest n for the fixed-point table");
    orb->add_option("--p-max", or_p, "ledger period bound (0 skips the ledger)");
    orb->add_option("--ledger", or_ledger, "write the ledger here");
    orb->add_flag("--horizon-check", or_hc, "verify the horizon one period beyond p_max");

    std::string pr_t = "-1,-0.5,0,0.5,1";
    int pr_n = 0;
    auto* pr = app.add_subcommand("pressure", "topological pressure of t*phi");
    common(pr, true);
    pr->add_option("--t", pr_t, "comma-separated t values");
    pr->add_option("--periodic-n", pr_n, "also report the periodic-sum estimate at this n");

    auto* s0c = app.add_subcommand("s0", "the zero of t -> P(-t phi)");
    common(s0c, true);

    std::string ze_sys = "f", ze_s = "2", ze_w = "one";
    int ze_N = 8;
    auto* ze = app.add_subcommand("zeta", "truncated log-zeta of one system");
    common(ze, true);
    ze->add_option("--system", ze_sys, "f, tile, edge, edge-color, V0");
    ze->add_option("--s", ze_s, "re or re,im");
    ze->add_option("--N", ze_N, "truncation");
    ze->add_option("--weight", ze_w, "one or deg");

    int fa_N = 6;
    std::vector<std::string> fa_s;
    double fa_tol = 1e-10;
    auto* fa = app.add_subcommand("factorize", "per-n factorization of the degree-weighted series");
    common(fa, true);
    fa->add_option("--N", fa_N, "largest n");
    fa->add_option("--s", fa_s, "grid point re or re,im (repeatable; default s0 +- 0.3 grid)");
    fa->add_option("--residual-tol", fa_tol, "pass threshold");

    double cg_t = 1.0;
    auto* cg = app.add_subcommand("curvegap", "pressure gap between f and f restricted to the curve");
    common(cg, true);
    cg->add_option("--t", cg_t, "weight of phi");

    int em_m = 14, em_n = 28, em_runs = 100;
    bool em_greedy = false;
    auto* em = app.add_subcommand("em", "random vertex sequences against the E_m bound");
    common(em, false);
    em->add_option("--m", em_m, "level m");
    em->add_option("--n", em_n, "sequence length");
    em->add_option("--runs", em_runs, "number of seeded runs");
    em->add_flag("--greedy", em_greedy, "pick the neighbour keeping the most points");

    long nl_budget = 2000;
    int nl_coh = 3;
    auto* nl = app.add_subcommand("nli", "temporal-distance sweep and cohomology test");
    common(nl, true);
    nl->add_option("--budget", nl_budget, "number of sampled configurations");
    nl->add_option("--cohomology-n", nl_coh, "periods used by the cohomology test");

    SniParams sp;
    int sn_dn = 0;
    auto* sn = app.add_subcommand("sni", "strong non-integrability probe");
    common(sn, true);
    sn->add_option("--N0", sp.N0);
    sn->add_option("--span", sp.span);
    sn->add_option("--M0", sp.M0);
    sn->add_option("--M-max", sp.M_max);
    sn->add_option("--epsilon", sp.epsilon);
    sn->add_option("--dn", sn_dn, "estimate lambda0 from D_n up to this level");

    int po_p = 10, po_coh = 3;
    std::string po_grid, po_ledger;
    bool po_hc = false;
    auto* po = app.add_subcommand("pot", "prime orbit counting against Li(e^{s0 T})");
    common(po, true);
    po->add_option("--p-max", po_p, "ledger period bound");
    po->add_option("--grid", po_grid, "comma-separated T values (default 1..horizon)");
    po->add_option("--ledger", po_ledger, "read the ledger from here if present, else write it");
    po->add_flag("--horizon-check", po_hc, "verify the horizon one period beyond p_max");
    po->add_option("--cohomology-n", po_coh);

    CLI11_PARSE(app, argc, argv);

    std::string cmd = app.get_subcommands().front()->get_name();
    try {
        cfg.check();
        if (cmd == "validate") return cmd_validate(cfg);
        if (cmd == "levels") return cmd_levels(cfg, lv_n, lv_dn);
        if (cmd == "shifts") return cmd_shifts(cfg, sh_n);
        if (cmd == "orbits") return cmd_orbits(cfg, or_n, or_p, or_ledger, or_hc);
        if (cmd == "pressure") return cmd_pressure(cfg, pr_t, pr_n);
        if (cmd == "s0") return cmd_s0(cfg);
        if (cmd == "zeta") return cmd_zeta(cfg, ze_sys, ze_s, ze_N, ze_w);
        if (cmd == "factorize") return cmd_factorize(cfg, fa_N, fa_s, fa_tol);
        if (cmd == "curvegap") return cmd_curvegap(cfg, cg_t);
        if (cmd == "em") return cmd_em(cfg, em_m, em_n, em_runs, em_greedy);
        if (cmd == "nli") return cmd_nli(cfg, nl_budget, nl_coh);
        if (cmd == "sni") return cmd_sni(cfg, sp, sn_dn);
        if (cmd == "pot") return cmd_pot(cfg, po_p, po_grid, po_ledger, po_hc, po_coh);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        if (auto* ir = dynamic_cast<const InvalidRule*>(&e)) {
            std::string failed;
            for (const auto& c : ir->report().checks)
                if (!c.pass) failed += (failed.empty() ? "" : ",") + c.name;
            msg = "failing checks: " + failed;
        }
        std::cerr << "{\"error\":\"" << error_kind(e) << "\",\"command\":\"" << cmd << "\",\"message\":\""
                  << json_escape(msg) << "\"}\n";
        return 2;
    }
    return 2;
}
