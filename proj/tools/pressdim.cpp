// Command-line front end for the pressdim library.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "pressdim/boxdim.hpp"
#include "pressdim/hyperbolic.hpp"
#include "pressdim/interval_partition.hpp"
#include "pressdim/poincare.hpp"
#include "pressdim/pressure.hpp"
#include "pressdim/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pressdim;
using namespace pressdim::cli;

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    int threads = 1;
    std::optional<double> tol;
    std::optional<std::int64_t> truncation;
    bool table = false;
    bool export_partition = false;
};

/// Round-trip precision for files.
std::string num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    return format_double(x, 17);
}

/// Console precision.
std::string show(double x) { return std::isfinite(x) ? format_double(x) : num(x); }

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Run {
public:
    Run(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt) {
        if (!opt_.config.empty()) cfg_ = Config::load(opt_.config);
        fs::create_directories(opt_.out);
        report_["command"] = command_;
        report_["config_hash"] = cfg_ ? cfg_->hash_hex() : "none";
    }

    const Config& cfg() const {
        if (!cfg_) throw ConfigError(command_ + ": --config is required");
        return *cfg_;
    }
    bool has_config() const { return cfg_.has_value(); }
    json& report() { return report_; }
    const Options& opt() const { return opt_; }

    double tolerance(double def) const {
        if (opt_.tol) {
            if (!(*opt_.tol > 0.0)) throw ConfigError("--tol must be > 0");
            return *opt_.tol;
        }
        if (!cfg_) return def;
        const YAML::Node n = cfg_->root()["tolerance"];
        if (!n) return def;
        const double t = cfg_->as<double>(n, "tolerance");
        if (!(t > 0.0)) cfg_->fail(n, "tolerance must be > 0");
        return t;
    }

    PartitionConfig partition_config() const {
        PartitionConfig pc = parse_partition(cfg());
        if (opt_.truncation) pc.truncation = *opt_.truncation;
        return pc;
    }

    IntervalPartition partition() {
        const PartitionConfig pc = partition_config();
        IntervalPartition p = build_partition(pc.spec, pc.truncation);
        report_["generator"] = pc.spec.describe();
        report_["truncation"] = static_cast<std::int64_t>(p.truncation());
        if (opt_.export_partition) {
            std::ofstream os(path("partition.csv"));
            write_partition_csv(os, p);
        }
        return p;
    }

    GroupConfig group() {
        GroupConfig g = parse_group(cfg());
        json gj;
        gj["n"] = g.group.n;
        gj["k"] = g.group.k;
        json al = json::array();
        for (const auto& a : g.group.alphas) al.push_back(std::vector<double>(a.data(), a.data() + a.size()));
        gj["alphas"] = al;
        if (g.xi_at_infinity)
            gj["xi"] = "infinity";
        else
            gj["xi"] = std::vector<double>(g.xi.u.data(), g.xi.u.data() + g.xi.u.size());
        report_["group"] = gj;
        return g;
    }

    std::string path(const std::string& name) const { return (fs::path(opt_.out) / name).string(); }

    void write_report(const std::string& name) const {
        std::ofstream os(path(name));
        os << report_.dump(2) << "\n";
    }

private:
    std::string command_;
    Options opt_;
    std::optional<Config> cfg_;
    json report_;
};

json evidence_json(const CriticalExponentEstimate& e) {
    json ev = json::array();
    for (const auto& r : e.evidence) ev.push_back({{"N", r.N}, {"partial_sum", r.partial}});
    return ev;
}

json estimate_json(const CriticalExponentEstimate& e) {
    return {{"s_low", e.s_low},
            {"s_high", jnum(e.s_high)},
            {"width", jnum(e.width())},
            {"divergence_behavior", to_string(e.behavior)},
            {"bisection_steps", e.bisection_steps},
            {"evidence_t", e.evidence_t},
            {"evidence", evidence_json(e)},
            {"note", e.note}};
}

json dimension_json(const DimensionEstimate& d) {
    json levels = json::array();
    for (const auto& L : d.levels)
        levels.push_back({{"delta", L.delta},
                          {"count", L.count},
                          {"log_inv_delta", L.log_inv_delta},
                          {"log_count", L.log_count},
                          {"used", L.used},
                          {"excluded", L.excluded}});
    return {{"lower_dim", d.lower_dim},
            {"upper_dim", d.upper_dim},
            {"regression_slope", d.regression_slope},
            {"window_slopes", d.window_slopes},
            {"residuals", d.residuals},
            {"delta_min", d.delta_min},
            {"delta_max", d.delta_max},
            {"algorithm", d.algorithm},
            {"levels", levels}};
}

json report_json(const VerifyReport& r) {
    json a = json::array();
    for (const auto& x : r.assertions) a.push_back({{"name", x.name}, {"verdict", to_string(x.verdict)}, {"detail", x.detail}});
    return {{"verdict", to_string(r.overall())}, {"assertions", a}, {"notes", r.notes}};
}

void print_report(const VerifyReport& r) {
    for (const auto& a : r.assertions) std::cout << to_string(a.verdict) << "  " << a.name << "  (" << a.detail << ")\n";
    for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
    std::cout << "overall: " << to_string(r.overall()) << "\n";
}

struct Grid {
    std::vector<double> deltas;
    BoxDimensionOptions options;
    json description;
};

Grid parse_grid(const Run& run, double base, double j_min, double j_max, double step) {
    Grid g;
    if (run.has_config()) {
        const auto& c = run.cfg();
        const YAML::Node b = c.section("boxdim", {"source", "points", "base", "j_min", "j_max", "step", "window_fraction"});
        base = c.get<double>(b, "base", base);
        j_min = c.get<double>(b, "j_min", j_min);
        j_max = c.get<double>(b, "j_max", j_max);
        step = c.get<double>(b, "step", step);
        g.options.window_fraction = c.get<double>(b, "window_fraction", 0.5);
        if (!(base > 1.0)) c.fail(b["base"], "base must be > 1");
        if (!(step > 0.0) || !(j_max >= j_min)) c.fail(b, "need step > 0 and j_max >= j_min");
    }
    g.deltas = geometric_deltas(base, j_min, j_max, step);
    g.description = {{"base", base}, {"j_min", j_min}, {"j_max", j_max}, {"step", step}};
    return g;
}

void write_boxdim_outputs(const Run& run, const DimensionEstimate& d, const std::string& stem) {
    std::ofstream csv(run.path(stem + ".csv"));
    csv << "delta,count,algorithm\n";
    for (const auto& L : d.levels) csv << num(L.delta) << "," << L.count << "," << d.algorithm << "\n";
    if (run.opt().table) {
        std::ofstream t(run.path(stem + "_table.csv"));
        t << "log_inv_delta,log_count,used\n";
        for (const auto& L : d.levels) t << num(L.log_inv_delta) << "," << num(L.log_count) << "," << (L.used ? 1 : 0) << "\n";
    }
}

// ---------------------------------------------------------------------------

BranchKind branch_kind_for(const IntervalPartition& p) {
    const auto k = p.generator().kind;
    return (k == GeneratorKind::Gauss || k == GeneratorKind::GaussRestricted) ? BranchKind::GaussAnalytic
                                                                              : BranchKind::LinearFull;
}

int cmd_pressure(Run& run) {
    const auto& c = run.cfg();
    const YAML::Node n = c.section("pressure", {"t_min", "t_max", "t_step", "method", "order", "alphabet", "grid"});
    const double t_min = c.get<double>(n, "t_min", 0.5), t_max = c.get<double>(n, "t_max", 2.0);
    const double step = c.get<double>(n, "t_step", 0.1);
    const auto method = c.get<std::string>(n, "method", "linear");
    const int order = c.get<int>(n, "order", 4);
    const auto alphabet = c.get<std::int64_t>(n, "alphabet", 64);
    const int grid = c.get<int>(n, "grid", 4096);
    if (!(step > 0.0) || t_max < t_min) c.fail(n, "need t_step > 0 and t_max >= t_min");
    if (method != "linear" && method != "cylinder" && method != "ratio")
        c.fail(n["method"], "unknown method '" + method + "' (expected linear, cylinder, ratio)");

    const IntervalPartition part = run.partition();
    std::optional<BranchMap> map;
    if (method != "linear") map.emplace(part, branch_kind_for(part));

    const auto rows = static_cast<int>(std::floor((t_max - t_min) / step + 1e-9)) + 1;
    std::ofstream csv(run.path("pressure.csv"));
    csv << "t,lower,upper,method,truncation,tail_bound\n";
    json samples = json::array();
    for (int i = 0; i < rows; ++i) {
        const double t = t_min + step * i;
        PressureSample s;
        if (method == "linear")
            s = pressure_linear(part, t);
        else if (method == "cylinder")
            s = pressure_cylinder_bracket(*map, t, order, alphabet);
        else
            s = pressure_ratio_bracket(*map, t, order, grid);
        csv << num(t) << "," << num(s.lower) << "," << num(s.upper) << "," << s.method_label() << "," << s.truncation
            << "," << num(s.tail_bound) << "\n";
        samples.push_back({{"t", t},
                           {"infinite", s.infinite},
                           {"lower", jnum(s.lower)},
                           {"upper", jnum(s.upper)},
                           {"tail_bound", jnum(s.tail_bound)},
                           {"distortion", s.distortion},
                           {"note", s.note}});
    }
    run.report()["method"] = method;
    run.report()["samples"] = samples;
    run.write_report("pressure.json");
    std::cout << "wrote " << rows << " rows to " << run.path("pressure.csv") << "\n";
    return 0;
}

int cmd_s_infinity(Run& run) {
    const double tol = run.tolerance(1e-3);
    const IntervalPartition part = run.partition();
    const StabilityVerdict v = classify_s_infinity_behavior(part, tol);
    run.report()["tolerance"] = tol;
    run.report()["estimate"] = estimate_json(v.estimate);
    run.report()["stability"] = {{"behavior", to_string(v.behavior)}, {"annotation", v.annotation}};
    run.write_report("s_infinity.json");
    std::cout << "s_inf in [" << show(v.estimate.s_low) << ", " << show(v.estimate.s_high) << "]  "
              << to_string(v.behavior) << "\n";
    return 0;
}

int cmd_bowen(Run& run) {
    const auto& c = run.cfg();
    const YAML::Node n =
        c.section("bowen", {"t_min", "t_max", "orders", "alphabet", "ratio_order", "ratio_grid"});
    const double tol = run.tolerance(1e-9);
    const double t_min = c.get<double>(n, "t_min", 0.1), t_max = c.get<double>(n, "t_max", 2.0);
    const IntervalPartition part = run.partition();
    const BranchMap map(part, branch_kind_for(part));
    run.report()["tolerance"] = tol;
    run.report()["t_range"] = {t_min, t_max};
    auto root_json = [](const BowenResult& b) {
        return json{{"t_low", b.t_low},         {"t_high", b.t_high},     {"width", b.width()},
                    {"bracketed", b.bracketed}, {"evaluations", b.evaluations}, {"note", b.note}};
    };
    if (map.kind() == BranchKind::LinearFull) {
        const BowenResult b = bowen_root([&](double t) { return pressure_linear(part, t); }, t_min, t_max, tol);
        run.report()["method"] = "linear-series";
        run.report()["root"] = root_json(b);
        std::cout << "root in [" << show(b.t_low) << ", " << show(b.t_high) << "]\n";
    } else {
        const auto orders = c.get<std::vector<int>>(n, "orders", {8, 12, 16});
        const auto alphabet = c.get<std::int64_t>(n, "alphabet", 64);
        const int ratio_order = c.get<int>(n, "ratio_order", 0);
        const int ratio_grid = c.get<int>(n, "ratio_grid", 4096);
        const NestedBowenResult r = bowen_nested(map, orders, alphabet, t_min, t_max, tol, ratio_order, ratio_grid);
        json oj = json::array();
        for (const auto& o : r.orders) {
            json j = root_json(o.root);
            j["order"] = o.order;
            j["pressure_width"] = o.pressure_width;
            j["distortion"] = o.distortion;
            j["bound"] = o.bound;
            oj.push_back(j);
            std::cout << "order " << o.order << ": [" << show(o.root.t_low) << ", " << show(o.root.t_high)
                      << "] width " << show(o.root.width()) << " bound " << show(o.bound) << "\n";
        }
        run.report()["method"] = "cylinder-bracket";
        run.report()["alphabet"] = alphabet;
        run.report()["orders"] = oj;
        run.report()["nested"] = r.nested;
        run.report()["intersection"] = {r.plain.lo, r.plain.hi};
        if (r.ratio) {
            json rj = root_json(*r.ratio);
            rj["order"] = r.ratio_order;
            rj["grid"] = r.ratio_grid;
            run.report()["ratio"] = rj;
            run.report()["certified"] = {r.certified.lo, r.certified.hi};
            std::cout << "ratio enclosure: [" << show(r.ratio->t_low) << ", " << show(r.ratio->t_high) << "]\n";
        }
        std::cout << "intersection: [" << show(r.certified.lo) << ", " << show(r.certified.hi) << "]\n";
    }
    run.write_report("bowen.json");
    return 0;
}

int cmd_boxdim(Run& run) {
    const auto& c = run.cfg();
    const YAML::Node n = c.section("boxdim", {"source", "points", "base", "j_min", "j_max", "step", "window_fraction"});
    const auto source = c.get<std::string>(n, "source", "endpoints");
    Grid grid = parse_grid(run, 2.0, 6, 18, 1);
    std::optional<PointCloud> cloud;
    if (source == "reciprocals") {
        auto pts = c.get<std::int64_t>(n, "points", 1'000'000);
        if (run.opt().truncation) pts = *run.opt().truncation;
        if (pts < 1) c.fail(n["points"], "points must be >= 1");
        std::vector<double> x(static_cast<std::size_t>(pts));
        for (std::int64_t i = 0; i < pts; ++i) x[i] = 1.0 / static_cast<double>(i + 1);
        cloud = PointCloud::line(std::move(x), "{1/n : n <= " + std::to_string(pts) + "}");
        run.report()["points"] = pts;
    } else if (source == "endpoints") {
        const IntervalPartition part = run.partition();
        cloud = endpoint_cloud(part);
        grid.options = [&] {
            BoxDimensionOptions o = endpoint_box_options(part, 0.01);
            o.window_fraction = grid.options.window_fraction;
            return o;
        }();
    } else if (source == "orbit") {
        const GroupConfig g = run.group();
        const YAML::Node on = c.section("orbit", {"radius"});
        auto M = c.get<std::int64_t>(on, "radius", g.group.k == 1 ? 100'000 : 400);
        if (run.opt().truncation) M = *run.opt().truncation;
        cloud = parabolic_orbit(g.group, g.xi, M);
        const double wf = grid.options.window_fraction;
        grid.options = orbit_box_options(g.group, g.xi, M, 0.01);
        grid.options.window_fraction = wf;
        run.report()["radius"] = M;
    } else {
        c.fail(n["source"], "unknown source '" + source + "' (expected endpoints, reciprocals, orbit)");
    }
    const DimensionEstimate d = estimate_box_dimension(*cloud, grid.deltas, grid.options);
    run.report()["source"] = source;
    run.report()["cloud_size"] = static_cast<std::int64_t>(cloud->size());
    run.report()["grid"] = grid.description;
    run.report()["estimate"] = dimension_json(d);
    write_boxdim_outputs(run, d, "boxdim");
    run.write_report("boxdim.json");
    std::cout << "box dimension in [" << show(d.lower_dim) << ", " << show(d.upper_dim) << "]\n";
    return 0;
}

int cmd_gaps(Run& run) {
    const auto& c = run.cfg();
    const YAML::Node n = c.section("gaps", {"window_start", "u_max"});
    const IntervalPartition part = run.partition();
    const GapExponentEstimate g = gap_exponent_bounds(part, c.get<double>(n, "window_start", 0.5));
    run.report()["materialized"] = {{"L_lower", g.L_lower},
                                    {"L_upper", g.L_upper},
                                    {"L_lower_sorted", g.L_lower_sorted},
                                    {"L_upper_sorted", g.L_upper_sorted},
                                    {"n_from", g.n_from},
                                    {"n_to", g.n_to}};
    std::ofstream csv(run.path("gaps.csv"));
    csv << "n,ratio\n";
    for (const auto& s : g.ratios) csv << num(s.n) << "," << num(s.ratio) << "\n";
    std::cout << "materialized: L in [" << show(g.L_lower) << ", " << show(g.L_upper) << "]\n";
    if (part.tail_kind() == TailKind::Rule) {
        const double u_max = c.get<double>(n, "u_max", 1e6);
        const GapExponentEstimate a = gap_exponent_asymptotic(part, u_max);
        run.report()["asymptotic"] = {{"L_lower", a.L_lower}, {"L_upper", a.L_upper}, {"drift", a.drift}, {"u_max", u_max}};
        std::cout << "asymptotic:   L in [" << show(a.L_lower) << ", " << show(a.L_upper) << "]\n";
    }
    run.write_report("gaps.json");
    return 0;
}

int cmd_orbit(Run& run) {
    const auto& c = run.cfg();
    const GroupConfig g = run.group();
    const YAML::Node n = c.section("orbit", {"radius"});
    auto M = c.get<std::int64_t>(n, "radius", 1000);
    if (run.opt().truncation) M = *run.opt().truncation;
    const PointCloud cloud = parabolic_orbit(g.group, g.xi, M);
    std::ofstream csv(run.path("orbit.csv"));
    const int d = cloud.ambient();
    for (int j = 0; j < d; ++j) csv << (j ? "," : "") << "x" << j;
    csv << "\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double* p = cloud.point(i);
        for (int j = 0; j < d; ++j) csv << (j ? "," : "") << num(p[j]);
        csv << "\n";
    }
    run.report()["radius"] = M;
    run.report()["points"] = static_cast<std::int64_t>(cloud.size());
    run.write_report("orbit.json");
    std::cout << cloud.size() << " orbit points\n";
    return 0;
}

int cmd_poincare(Run& run) {
    const auto& c = run.cfg();
    const GroupConfig g = run.group();
    const YAML::Node n = c.section("poincare", {"s", "radius", "band"});
    const double tol = run.tolerance(0.01);
    const double band = c.get<double>(n, "band", 1e-9);
    const CriticalExponentEstimate e = critical_exponent(g.group, tol, band);
    run.report()["tolerance"] = tol;
    run.report()["critical_exponent"] = estimate_json(e);
    if (n["s"]) {
        auto M = c.get<std::int64_t>(n, "radius", 1000);
        if (run.opt().truncation) M = *run.opt().truncation;
        const PoincareSample s = poincare_partial(g.group, c.need<double>(n, "s"), M, band);
        run.report()["sample"] = {{"s", s.s},
                                  {"radius", s.radius},
                                  {"partial_sum", s.partial_sum},
                                  {"tail_classification", to_string(s.tail_class)},
                                  {"tail_bound", jnum(s.tail_bound)},
                                  {"minorant", s.minorant}};
        std::cout << "partial sum " << show(s.partial_sum) << " (" << to_string(s.tail_class) << ")\n";
    }
    run.write_report("poincare.json");
    std::cout << "critical exponent in [" << show(e.s_low) << ", " << show(e.s_high) << "]\n";
    return 0;
}

int cmd_counting(Run& run) {
    const auto& c = run.cfg();
    const GroupConfig g = run.group();
    const YAML::Node n = c.section("counting", {"t_max", "levels"});
    const CountingFunction cf = counting_exponent(g.group, c.get<double>(n, "t_max", 25.0), c.get<int>(n, "levels", 50));
    std::ofstream csv(run.path("counting.csv"));
    csv << "t,count\n";
    for (std::size_t i = 0; i < cf.counts.size(); ++i) csv << num(cf.thresholds[i]) << "," << cf.counts[i] << "\n";
    run.report()["slopes"] = cf.slopes;
    run.report()["final_slope"] = cf.final_slope;
    run.report()["fit_from_level"] = static_cast<std::int64_t>(cf.fit_from);
    run.write_report("counting.json");
    std::cout << "final slope " << show(cf.final_slope) << "\n";
    return 0;
}

int cmd_verify_main(Run& run) {
    const auto& c = run.cfg();
    const YAML::Node n = c.section("verify", {"dim_tolerance", "exists_gap", "unresolved_share", "u_max"});
    MainVerifyOptions o;
    o.tol = run.tolerance(1e-3);
    const Grid grid = parse_grid(run, 2.0, 6, 18, 1);
    o.deltas = grid.deltas;
    o.dim_tolerance = c.get<double>(n, "dim_tolerance", o.dim_tolerance);
    o.exists_gap = c.get<double>(n, "exists_gap", o.exists_gap);
    o.unresolved_share = c.get<double>(n, "unresolved_share", o.unresolved_share);
    o.u_max = c.get<double>(n, "u_max", o.u_max);
    const IntervalPartition part = run.partition();
    const MainVerifyResult r = verify_theorem_main(part, o);
    auto& rep = run.report();
    rep["tolerance"] = o.tol;
    rep["grid"] = grid.description;
    rep["s_infinity"] = estimate_json(r.s_inf);
    rep["gap_exponents"] = {{"L_lower", r.L_lower},
                            {"L_upper", r.L_upper},
                            {"eps", r.eps},
                            {"materialized_L_lower", r.gaps.L_lower},
                            {"materialized_L_upper", r.gaps.L_upper}};
    if (r.far_gaps) rep["gap_exponents"]["drift"] = r.far_gaps->drift;
    if (r.dimension)
        rep["box_dimension"] = dimension_json(*r.dimension);
    else
        rep["box_dimension"] = {{"error", r.dimension_error}};
    rep["report"] = report_json(r.report);
    run.write_report("verify_main.json");
    print_report(r.report);
    return r.report.exit_code();
}

int cmd_verify_hdim(Run& run) {
    const auto& c = run.cfg();
    const GroupConfig g = run.group();
    const YAML::Node vn = c.section("verify", {"agreement", "unresolved_share"});
    const YAML::Node on = c.section("orbit", {"radius"});
    const YAML::Node cn = c.section("counting", {"t_max", "levels"});
    HdimVerifyOptions o;
    o.tol = run.tolerance(0.01);
    o.t_max = c.get<double>(cn, "t_max", o.t_max);
    o.levels = c.get<int>(cn, "levels", o.levels);
    o.radius = c.get<std::int64_t>(on, "radius", 0);
    if (run.opt().truncation) o.radius = *run.opt().truncation;
    o.agreement = c.get<double>(vn, "agreement", o.agreement);
    o.unresolved_share = c.get<double>(vn, "unresolved_share", o.unresolved_share);
    if (c.root()["boxdim"]) {
        const Grid grid = parse_grid(run, std::sqrt(2.0), 6, g.group.k == 1 ? 40 : 24, 1);
        o.deltas = grid.deltas;
        run.report()["grid"] = grid.description;
    }
    if (g.xi_at_infinity) throw ValidationError("xi is fixed by P");
    const HdimVerifyResult r = verify_theorem_hdim(g.group, g.xi, o);
    auto& rep = run.report();
    rep["tolerance"] = o.tol;
    rep["orbit_points"] = static_cast<std::int64_t>(r.orbit_size);
    rep["cap_radius"] = r.cap_radius;
    rep["critical_exponent"] = estimate_json(r.critical);
    if (r.counting)
        rep["counting"] = {{"t_max", o.t_max}, {"levels", o.levels}, {"final_slope", r.counting->final_slope}};
    else
        rep["counting"] = {{"error", r.counting_error}};
    if (r.dimension)
        rep["box_dimension"] = dimension_json(*r.dimension);
    else
        rep["box_dimension"] = {{"error", r.dimension_error}};
    rep["report"] = report_json(r.report);
    run.write_report("verify_hdim.json");
    print_report(r.report);
    return r.report.exit_code();
}

int cmd_selftest(Run& run) {
    SelftestOptions o;
    double alpha = 1.0, xi = 0.3;
    std::int64_t k_min = 50, k_max = 10'000;
    if (run.has_config()) {
        const auto& c = run.cfg();
        const YAML::Node n = c.section("selftest", {"seed", "trials", "sandwich_alpha", "sandwich_xi", "k_min", "k_max"});
        o.seed = c.get<std::uint64_t>(n, "seed", o.seed);
        o.trials = c.get<std::int64_t>(n, "trials", o.trials);
        alpha = c.get<double>(n, "sandwich_alpha", alpha);
        xi = c.get<double>(n, "sandwich_xi", xi);
        k_min = c.get<std::int64_t>(n, "k_min", k_min);
        k_max = c.get<std::int64_t>(n, "k_max", k_max);
    }
    const auto checks = geometry_selftest(o);
    json cj = json::array();
    int passed = 0;
    for (const auto& ch : checks) {
        passed += ch.passed();
        cj.push_back({{"name", ch.name},
                      {"trials", ch.trials},
                      {"max_error", ch.max_error},
                      {"tolerance", ch.tolerance},
                      {"passed", ch.passed()}});
        std::cout << (ch.passed() ? "PASS  " : "FAIL  ") << ch.name << "  max error " << show(ch.max_error)
                  << " (tolerance " << num(ch.tolerance) << ", " << ch.trials << " trials)\n";
    }
    const SandwichReport sw = parabolic_sandwich(alpha, xi, k_min, k_max);
    const bool sw_ok = sw.spread <= 1.0 && sw.upper_bound_holds;
    passed += sw_ok;
    std::cout << (sw_ok ? "PASS  " : "FAIL  ") << "parabolic-sandwich  [" << show(sw.lower) << ", " << show(sw.upper)
              << "] spread " << num(sw.spread) << "\n";
    const int total = static_cast<int>(checks.size()) + 1;
    std::cout << passed << "/" << total << " checks passed\n";
    run.report()["seed"] = o.seed;
    run.report()["checks"] = cj;
    run.report()["sandwich"] = {{"alpha", alpha},      {"xi", xi},         {"k_min", k_min},
                                {"k_max", k_max},      {"lower", sw.lower}, {"upper", sw.upper},
                                {"spread", sw.spread}, {"d_o_z", sw.d_o_z}, {"upper_bound_holds", sw.upper_bound_holds}};
    run.report()["passed"] = passed;
    run.report()["total"] = total;
    run.write_report("selftest.json");
    return passed == total ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pressdim: pressure, critical exponents and box dimensions"};
    app.require_subcommand(1);
    Options opt;
    struct Entry {
        const char* name;
        const char* help;
        int (*fn)(Run&);
    };
    const std::vector<Entry> entries = {
        {"pressure", "pressure curve over a t grid", cmd_pressure},
        {"s-infinity", "critical exponent s_inf of a partition", cmd_s_infinity},
        {"bowen", "Bowen root bracket", cmd_bowen},
        {"boxdim", "box dimension of a point cloud", cmd_boxdim},
        {"gaps", "gap exponents of a partition", cmd_gaps},
        {"orbit", "parabolic orbit on the boundary sphere", cmd_orbit},
        {"poincare", "Poincare series and critical exponent", cmd_poincare},
        {"counting", "orbit counting function", cmd_counting},
        {"verify-main", "s_inf, gap exponents and box dimension of endpoints", cmd_verify_main},
        {"verify-hdim", "critical exponent, counting and orbit box dimension", cmd_verify_hdim},
        {"selftest", "hyperbolic geometry property suite", cmd_selftest},
    };
    std::vector<CLI::App*> subs;
    for (const auto& e : entries) {
        CLI::App* s = app.add_subcommand(e.name, e.help);
        s->add_option("--config", opt.config, "YAML run configuration");
        s->add_option("--out", opt.out, "output directory")->capture_default_str();
        s->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--tol", opt.tol, "tolerance override");
        s->add_option("--truncation", opt.truncation, "truncation or radius override");
        s->add_flag("--table", opt.table, "also write the (log 1/delta, log N) table");
        s->add_flag("--export-partition", opt.export_partition, "also write partition.csv");
        subs.push_back(s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    set_thread_count(static_cast<unsigned>(opt.threads));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            Run run(entries[i].name, opt);
            return entries[i].fn(run);
        } catch (const ConfigError& e) {
            std::cerr << e.what() << "\n";
            return 2;
        } catch (const CapacityError& e) {
            std::cerr << "capacity: " << e.what() << "\n";
            return 2;
        } catch (const ValidationError& e) {
            std::cerr << "invalid input: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    return 2;
}
