// Command-line front end: every engine behind CSV emission with a resolved
// JSON config echo next to each output, deterministic byte-for-byte.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "monostat/monostat.hpp"

namespace {

using nlohmann::json;
using namespace monostat;

struct FailureLog {
    std::vector<json> failures;

    void check(bool ok, const std::string& name, const std::string& detail) {
        if (!ok) failures.push_back({{"check", name}, {"detail", detail}});
    }

    [[nodiscard]] int finish() const {
        if (failures.empty()) return 0;
        json summary;
        summary["failures"] = failures;
        std::cerr << summary.dump() << "\n";
        return 1;
    }
};

std::uint64_t capacity_from_env() {
    if (const char* env = std::getenv("MONOSTAT_CAPACITY")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
        std::cerr << "warning: ignoring malformed MONOSTAT_CAPACITY\n";
    }
    return kDefaultCapacity;
}

struct SpectrumOpts {
    std::string spectrum = "harmonic";  // harmonic | iso | path to JSON
    double hbar_omega = 1.0;
    unsigned dim = 3;
    std::uint64_t levels = 64;

    void attach(CLI::App* cmd) {
        cmd->add_option("--spectrum", spectrum,
                        "builtin 'harmonic' or 'iso', or a spectrum JSON file");
        cmd->add_option("--hbar-omega", hbar_omega, "oscillator quantum (energy units)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--dim", dim, "dimension of the isotropic oscillator")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--levels", levels, "retained levels/shells for builtin spectra")
            ->check(CLI::PositiveNumber);
    }

    [[nodiscard]] Spectrum build() const {
        if (spectrum == "harmonic") return harmonic_spectrum(hbar_omega, levels);
        if (spectrum == "iso") return iso_oscillator_spectrum(dim, hbar_omega, levels);
        std::ifstream in(spectrum);
        if (!in) throw std::runtime_error("cannot open spectrum file: " + spectrum);
        std::stringstream buf;
        buf << in.rdbuf();
        return spectrum_from_json(buf.str());
    }

    [[nodiscard]] json describe() const {
        return {{"spectrum", spectrum},
                {"hbar_omega", hbar_omega},
                {"dim", dim},
                {"levels", levels}};
    }
};

struct PointOpts {
    std::optional<double> u, beta, z, mu;
    std::string grid_path;

    void attach(CLI::App* cmd, bool with_grid = true) {
        cmd->add_option("--u", u, "dimensionless beta*hbar_omega");
        cmd->add_option("--beta", beta, "inverse temperature");
        cmd->add_option("--z", z, "activity/fugacity");
        cmd->add_option("--mu", mu, "chemical potential (converted to z)");
        if (with_grid)
            cmd->add_option("--grid", grid_path, "JSON grid file with 'u'/'beta' and 'z' axes");
    }

    [[nodiscard]] double resolve_beta(double hbar_omega) const {
        if (u && beta) throw CLI::ValidationError("--u and --beta are mutually exclusive");
        if (u) return *u / hbar_omega;
        if (beta) return *beta;
        throw CLI::ValidationError("need --u or --beta (or a --grid file)");
    }

    [[nodiscard]] double resolve_z(double beta_value) const {
        if (z && mu) throw CLI::ValidationError("--z and --mu are mutually exclusive");
        if (z) {
            if (!(*z >= 0.0)) throw CLI::ValidationError("--z must be >= 0");
            return *z;
        }
        if (mu) return fugacity_from_mu(beta_value, *mu);
        return 0.0;
    }
};

std::vector<double> parse_axis(const json& axis, const std::string& name) {
    std::vector<double> out;
    if (axis.is_array()) {
        for (const auto& v : axis) out.push_back(v.get<double>());
        return out;
    }
    if (!axis.is_object())
        throw std::runtime_error("grid axis '" + name + "' must be an array or object");
    const double lo = axis.at("min").get<double>();
    const double hi = axis.at("max").get<double>();
    const std::size_t count = axis.at("count").get<std::size_t>();
    const std::string scale = axis.value("scale", "linear");
    if (count == 0) return out;
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        if (scale == "log") {
            if (!(lo > 0.0))
                throw std::runtime_error("grid axis '" + name + "': log scale needs min > 0");
            out.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
        } else {
            out.push_back(lo + t * (hi - lo));
        }
    }
    return out;
}

struct GridSpec {
    std::vector<double> beta;  // already converted from u when needed
    std::vector<double> z;
    json resolved;
};

GridSpec load_grid(const std::string& path, double hbar_omega) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grid file: " + path);
    json doc = json::parse(in);
    GridSpec g;
    g.resolved = doc;
    const bool has_u = doc.contains("u");
    const bool has_beta = doc.contains("beta");
    if (has_u == has_beta)
        throw std::runtime_error("grid file needs exactly one of 'u' or 'beta'");
    for (double v : parse_axis(has_u ? doc["u"] : doc["beta"], has_u ? "u" : "beta"))
        g.beta.push_back(has_u ? v / hbar_omega : v);
    if (doc.contains("z"))
        g.z = parse_axis(doc["z"], "z");
    else
        g.z.push_back(0.0);
    return g;
}

/// Output sink: file or stdout, with the resolved config echoed next to the
/// file (or to stderr when writing to stdout).
struct Sink {
    explicit Sink(std::string path) : path_(std::move(path)) {
        if (path_ != "-") {
            file_.open(path_, std::ios::binary);
            if (!file_) throw std::runtime_error("cannot open output file: " + path_);
        }
    }

    std::ostream& os() { return path_ == "-" ? std::cout : file_; }

    void write_config(const json& resolved) const {
        if (path_ == "-") {
            std::cerr << resolved.dump(2) << "\n";
            return;
        }
        std::ofstream cfg(path_ + ".config.json", std::ios::binary);
        cfg << resolved.dump(2) << "\n";
    }

private:
    std::string path_;
    std::ofstream file_;
};

struct EngineRequest {
    const Spectrum& spectrum;
    const ModeOrder& order;
    std::string kind;  // "boltzmann" or a statistics kind name
    double beta;
    double z;
    std::size_t n_max;
    std::size_t mode_cutoff;
    std::uint64_t capacity;
};

SeriesResult run_engine(const EngineRequest& rq) {
    if (rq.kind == "boltzmann")
        return boltzmann_corrected_from_enumeration(rq.spectrum, rq.beta, rq.z, rq.n_max,
                                                    rq.mode_cutoff);
    return grand_partition_enumerated(rq.spectrum, rq.order, parse_statistics_kind(rq.kind),
                                      rq.beta, rq.z, rq.n_max, rq.mode_cutoff, rq.capacity);
}

/// Truncation order when the user does not fix one: driven by the series
/// majorant of the requested kind, never above 512, and never above the
/// exact termination order of the strict kinds on complete spectra.
std::size_t auto_n_max(const std::string& kind, const Spectrum& s, double beta, double z,
                       std::size_t mode_cutoff) {
    PartitionValue pf = partition_function(s, beta);
    const double zeta_ub = pf.certified ? pf.value + pf.tail_bound : pf.value;
    std::size_t n = 0;
    if (kind == "boltzmann" || kind == "monotone" || kind == "block-monotone") {
        n = default_n_max(zeta_ub * z);
    } else {
        if (zeta_ub * z >= 1.0)
            throw std::runtime_error("kind '" + kind +
                                     "' does not converge here; give --nmax explicitly");
        n = default_n_max_geometric(zeta_ub * z);
    }
    if (s.tail_kind() == TailKind::complete) {
        if (kind == "monotone")
            n = std::min<std::size_t>(n, mode_cutoff);
        else if (kind == "block-monotone")
            n = std::min<std::size_t>(n, s.num_levels());
    }
    return n;
}

std::optional<double> closed_engine_value(const std::string& kind, const SpectrumOpts& sopt,
                                          const Spectrum& s, double beta, double z,
                                          std::size_t n_max, std::size_t mode_cutoff) {
    if (kind == "boltzmann") {
        CompensatedSum zeta_trunc;
        std::uint64_t seen = 0;
        for (const auto& lv : s.levels())
            for (std::uint64_t g = 0; g < lv.degeneracy && seen < mode_cutoff; ++g, ++seen)
                zeta_trunc.add(std::exp(-beta * lv.energy));
        return z_boltzmann(zeta_trunc.value(), z);
    }
    if (kind == "monotone" && sopt.spectrum == "harmonic")
        return z_monotone_ho(beta * sopt.hbar_omega, z, n_max).value;
    if (kind == "full") {
        CompensatedSum zeta_trunc;
        std::uint64_t seen = 0;
        for (const auto& lv : s.levels())
            for (std::uint64_t g = 0; g < lv.degeneracy && seen < mode_cutoff; ++g, ++seen)
                zeta_trunc.add(std::exp(-beta * lv.energy));
        return z_full_uncorrected(zeta_trunc.value(), z);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// zeta: one-particle partition sums over a beta/u grid.

int cmd_zeta(const SpectrumOpts& sopt, const PointOpts& popt, const std::string& out) {
    const Spectrum s = sopt.build();
    std::vector<double> betas;
    json grid_echo;
    if (!popt.grid_path.empty()) {
        GridSpec g = load_grid(popt.grid_path, sopt.hbar_omega);
        betas = g.beta;
        grid_echo = g.resolved;
    } else {
        betas.push_back(popt.resolve_beta(sopt.hbar_omega));
    }
    Sink sink(out);
    sink.write_config({{"command", "zeta"},
                       {"spectrum", sopt.describe()},
                       {"grid", grid_echo},
                       {"out", out}});
    auto& os = sink.os();
    os << "beta,u,zeta,tail_bound,certified\n";
    for (double beta : betas) {
        const PartitionValue pf = partition_function(s, beta);
        csv_row(os, beta, beta * sopt.hbar_omega, pf.value, pf.tail_bound, pf.certified);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// grand: grand-partition values per (point, kind), optionally cross-checked
// against the closed-form route.

int cmd_grand(const SpectrumOpts& sopt, const PointOpts& popt, const std::string& kind,
              std::size_t n_max_opt, std::size_t cutoff_opt, bool both_engines,
              const std::string& out) {
    const Spectrum s = sopt.build();
    const ModeOrder order = kind == "monotone" || kind == "weakly-monotone"
                                ? ModeOrder::total_order(s.num_modes())
                                : ModeOrder::from_spectrum(s);
    const std::uint64_t capacity = capacity_from_env();
    const std::size_t cutoff =
        cutoff_opt > 0 ? cutoff_opt
                       : static_cast<std::size_t>(std::min<std::uint64_t>(s.num_modes(), 32));

    std::vector<std::pair<double, double>> points;
    json grid_echo;
    if (!popt.grid_path.empty()) {
        GridSpec g = load_grid(popt.grid_path, sopt.hbar_omega);
        grid_echo = g.resolved;
        for (double beta : g.beta)
            for (double z : g.z) points.emplace_back(beta, z);
    } else {
        const double beta = popt.resolve_beta(sopt.hbar_omega);
        points.emplace_back(beta, popt.resolve_z(beta));
    }

    Sink sink(out);
    sink.write_config({{"command", "grand"},
                       {"spectrum", sopt.describe()},
                       {"kind", kind},
                       {"n_max", n_max_opt},
                       {"mode_cutoff", cutoff},
                       {"both_engines", both_engines},
                       {"capacity", capacity},
                       {"grid", grid_echo},
                       {"out", out}});
    auto& os = sink.os();
    if (both_engines)
        os << "u,z,kind,value,coeff_tail,mode_tail,certified,closed_value,abs_gap\n";
    else
        os << "u,z,kind,value,coeff_tail,mode_tail,certified\n";

    FailureLog log;
    for (const auto& [beta, z] : points) {
        const std::size_t n_max =
            n_max_opt > 0 ? n_max_opt : auto_n_max(kind, s, beta, z, cutoff);
        const SeriesResult r =
            run_engine({s, order, kind, beta, z, n_max, cutoff, capacity});
        if (both_engines) {
            const auto closed = closed_engine_value(kind, sopt, s, beta, z, n_max, cutoff);
            if (!closed)
                throw std::runtime_error("no closed-form engine for kind '" + kind + "'");
            const double gap = std::abs(r.value - *closed);
            csv_row(os, beta * sopt.hbar_omega, z, kind, r.value, r.coeff_tail_bound,
                    r.mode_tail_bound, r.certified, *closed, gap);
            const double allow = r.coeff_tail_bound + r.mode_tail_bound +
                                 1e-9 * (1.0 + std::abs(*closed));
            log.check(!r.certified || gap <= allow, "grand.cross_check",
                      "gap " + csv_num(gap) + " exceeds " + csv_num(allow) + " at u=" +
                          csv_num(beta * sopt.hbar_omega) + " z=" + csv_num(z));
        } else {
            csv_row(os, beta * sopt.hbar_omega, z, kind, r.value, r.coeff_tail_bound,
                    r.mode_tail_bound, r.certified);
        }
    }
    return log.finish();
}

// ---------------------------------------------------------------------------
// coeffs: the per-order expansion table at a single point.

int cmd_coeffs(const SpectrumOpts& sopt, const PointOpts& popt, const std::string& kind,
               std::size_t n_max_opt, std::size_t cutoff_opt, const std::string& out) {
    const Spectrum s = sopt.build();
    const ModeOrder order = kind == "monotone" || kind == "weakly-monotone"
                                ? ModeOrder::total_order(s.num_modes())
                                : ModeOrder::from_spectrum(s);
    const double beta = popt.resolve_beta(sopt.hbar_omega);
    const double z = popt.resolve_z(beta);
    const std::uint64_t capacity = capacity_from_env();
    const std::size_t cutoff =
        cutoff_opt > 0 ? cutoff_opt
                       : static_cast<std::size_t>(std::min<std::uint64_t>(s.num_modes(), 32));
    const std::size_t n_max = n_max_opt > 0 ? n_max_opt : auto_n_max(kind, s, beta, z, cutoff);
    const SeriesResult r = run_engine({s, order, kind, beta, z, n_max, cutoff, capacity});

    Sink sink(out);
    sink.write_config({{"command", "coeffs"},
                       {"spectrum", sopt.describe()},
                       {"kind", kind},
                       {"beta", beta},
                       {"z", z},
                       {"n_max", n_max},
                       {"mode_cutoff", cutoff},
                       {"capacity", capacity},
                       {"out", out}});
    write_series_csv(sink.os(), r, z);
    return 0;
}

// ---------------------------------------------------------------------------
// bounds: sandwich scan over a grid, or the shrinking-activity path into the
// low-density corner of region R.

int cmd_bounds(const SpectrumOpts& sopt, const PointOpts& popt, double gamma,
               std::size_t rpath_steps, const std::string& out) {
    Sink sink(out);
    FailureLog log;
    if (rpath_steps > 0) {
        sink.write_config({{"command", "bounds"},
                           {"mode", "rpath"},
                           {"gamma", gamma},
                           {"steps", rpath_steps},
                           {"out", out}});
        auto& os = sink.os();
        os << "k,z,u,ratio,ratio_hi,lower_bound,distance,inside_r\n";
        double prev_distance = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k <= rpath_steps; ++k) {
            const double z = std::pow(2.0, -static_cast<double>(k));
            const double t = std::exp(2.0 * gamma * std::log(z / 2.0));
            const double u = 2.0 * (-std::log1p(-t));
            const RatioResult r = ratio_zm_z0(u, z);
            const double lower = 1.0 - std::pow(z * z / 4.0, 1.0 - gamma);
            const double distance = 1.0 - r.ratio;
            const bool inside = region_r(u, z, gamma);
            csv_row(os, k, z, u, r.ratio, r.hi, lower, distance, inside);
            log.check(r.ratio >= lower - 1e-12 && r.hi <= 1.0 + 1e-12, "bounds.rpath_range",
                      "ratio outside [lower, 1] at k=" + csv_num(k));
            log.check(distance < prev_distance, "bounds.rpath_monotone",
                      "distance to 1 not decreasing at k=" + csv_num(k));
            log.check(inside, "bounds.rpath_region", "point left region R at k=" + csv_num(k));
            prev_distance = distance;
        }
        return log.finish();
    }

    std::vector<double> us, zs;
    json grid_echo;
    if (!popt.grid_path.empty()) {
        GridSpec g = load_grid(popt.grid_path, sopt.hbar_omega);
        grid_echo = g.resolved;
        for (double beta : g.beta) us.push_back(beta * sopt.hbar_omega);
        zs = g.z;
    } else if (popt.u || popt.beta) {
        const double beta = popt.resolve_beta(sopt.hbar_omega);
        us.push_back(beta * sopt.hbar_omega);
        zs.push_back(popt.resolve_z(beta));
    } else {
        // Default scan: 25 x 20 grid over u in [0.05, 5], z in [0, 1.9].
        for (std::size_t i = 0; i < 25; ++i)
            us.push_back(0.05 + static_cast<double>(i) * (4.95 / 24.0));
        for (std::size_t j = 0; j < 20; ++j) zs.push_back(0.1 * static_cast<double>(j));
    }

    sink.write_config({{"command", "bounds"},
                       {"mode", "sandwich"},
                       {"grid", grid_echo},
                       {"u", us},
                       {"z", zs},
                       {"out", out}});
    auto& os = sink.os();
    os << "u,z,f,lower,zm,zm_tail,upper,holds_with_certainty\n";
    std::vector<SandwichResult> results(us.size() * zs.size());
    parallel_for_indexed(results.size(), [&](std::size_t idx) {
        results[idx] = sandwich_check(us[idx / zs.size()], zs[idx % zs.size()]);
    });
    for (std::size_t idx = 0; idx < results.size(); ++idx) {
        const SandwichResult& r = results[idx];
        csv_row(os, us[idx / zs.size()], zs[idx % zs.size()], r.f, r.lower, r.zm, r.zm_tail,
                r.upper, r.holds_with_certainty);
        log.check(r.holds_with_certainty, "bounds.sandwich",
                  "violated at u=" + csv_num(us[idx / zs.size()]) +
                      " z=" + csv_num(zs[idx % zs.size()]));
    }
    return log.finish();
}

// ---------------------------------------------------------------------------
// appendix: the second-derivative scan and the quartic fit, two CSV files.

int cmd_appendix(std::size_t fit_nmin, std::size_t fit_nmax, std::size_t scan_nmin,
                 std::size_t scan_nmax, std::size_t scan_points, const std::string& outdir) {
    FailureLog log;
    const std::string scan_path = outdir + "/delta2_scan.csv";
    const std::string fit_path = outdir + "/delta2_fit.csv";
    {
        Sink sink(scan_path);
        sink.write_config({{"command", "appendix"},
                           {"fit_n", {fit_nmin, fit_nmax}},
                           {"scan_n", {scan_nmin, scan_nmax}},
                           {"scan_points", scan_points},
                           {"out", outdir}});
        auto& os = sink.os();
        os << "n,x,d2\n";
        for (std::size_t n = scan_nmin; n <= scan_nmax; ++n)
            for (std::size_t j = 1; j <= scan_points; ++j) {
                const double x = std::pow(
                    10.0, static_cast<double>(j) / static_cast<double>(scan_points));
                const double d2 = delta_d2(n, x);
                csv_row(os, n, x, d2);
                if (n >= 2)
                    log.check(d2 < 0.0, "appendix.negativity",
                              "d2 >= 0 at n=" + csv_num(n) + " x=" + csv_num(x));
            }
    }
    {
        const QuarticFit fit = fit_delta2(fit_nmin, fit_nmax);
        Sink sink(fit_path);
        sink.write_config({{"command", "appendix.fit"},
                           {"fit_n", {fit_nmin, fit_nmax}},
                           {"out", outdir}});
        auto& os = sink.os();
        os << "b0,b1,b2,b3,b4,max_residual\n";
        csv_row(os, fit.b[0], fit.b[1], fit.b[2], fit.b[3], fit.b[4], fit.max_residual);
        log.check(fit.max_residual <= 1e-9, "appendix.residual",
                  "fit residual " + csv_num(fit.max_residual) + " above 1e-9");
    }
    return log.finish();
}

// ---------------------------------------------------------------------------
// scan: the observables comparison table.

int cmd_scan(const SpectrumOpts& sopt, const PointOpts& popt, const std::string& kinds_csv,
             std::size_t n_max_opt, std::size_t cutoff_opt, const std::string& out) {
    const Spectrum s = sopt.build();
    const std::uint64_t capacity = capacity_from_env();
    const std::size_t cutoff =
        cutoff_opt > 0 ? cutoff_opt
                       : static_cast<std::size_t>(std::min<std::uint64_t>(s.num_modes(), 32));

    bool include_boltzmann = false;
    std::vector<StatisticsKind> kinds;
    bool needs_total = false;
    {
        std::stringstream ss(kinds_csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            if (item == "boltzmann") {
                include_boltzmann = true;
                continue;
            }
            const StatisticsKind k = parse_statistics_kind(item);
            needs_total = needs_total || k == StatisticsKind::monotone ||
                          k == StatisticsKind::weakly_monotone_total;
            kinds.push_back(k);
        }
    }
    const ModeOrder order = needs_total ? ModeOrder::total_order(s.num_modes())
                                        : ModeOrder::from_spectrum(s);

    std::vector<ThermoPoint> points;
    json grid_echo;
    if (!popt.grid_path.empty()) {
        GridSpec g = load_grid(popt.grid_path, sopt.hbar_omega);
        grid_echo = g.resolved;
        for (double beta : g.beta)
            for (double z : g.z) points.emplace_back(beta, z);
    } else {
        const double beta = popt.resolve_beta(sopt.hbar_omega);
        points.emplace_back(beta, popt.resolve_z(beta));
    }
    std::size_t n_max = n_max_opt;
    if (n_max == 0) {
        for (const auto& pt : points) {
            n_max = std::max(n_max, auto_n_max(include_boltzmann ? "boltzmann" : "monotone",
                                               s, pt.beta, pt.z, cutoff));
        }
        n_max = std::max<std::size_t>(n_max, 1);
    }

    const auto rows =
        compare_statistics(s, order, kinds, points, n_max, cutoff, capacity, include_boltzmann);
    Sink sink(out);
    sink.write_config({{"command", "scan"},
                       {"spectrum", sopt.describe()},
                       {"kinds", kinds_csv},
                       {"n_max", n_max},
                       {"mode_cutoff", cutoff},
                       {"capacity", capacity},
                       {"grid", grid_echo},
                       {"out", out}});
    write_observables_csv(sink.os(), rows, sopt.hbar_omega);
    return 0;
}

// ---------------------------------------------------------------------------
// fock-check: operator relations plus the counting identities.

int cmd_fock_check(std::size_t cutoff, std::size_t n_max, const std::string& dump_basis,
                   const std::string& out) {
    const std::uint64_t capacity = capacity_from_env();
    Sink sink(out);
    sink.write_config({{"command", "fock-check"},
                       {"mode_cutoff", cutoff},
                       {"n_max", n_max},
                       {"dump_basis", dump_basis},
                       {"capacity", capacity},
                       {"out", out}});

    if (!dump_basis.empty()) {
        const Spectrum s = harmonic_spectrum(1.0, cutoff);
        const ModeOrder order = ModeOrder::from_spectrum(s);
        std::vector<BasisState> states;
        for (std::size_t n = 0; n <= n_max; ++n) {
            const auto level = enumerate_basis(order, StatisticsKind::monotone, n, cutoff,
                                               capacity);
            states.insert(states.end(), level.begin(), level.end());
        }
        std::ofstream dump(dump_basis, std::ios::binary);
        if (!dump) throw std::runtime_error("cannot open basis dump file: " + dump_basis);
        write_basis_csv(dump, states, s, order);
    }
    auto& os = sink.os();
    os << "check,detail,deviation,pass\n";
    FailureLog log;

    const ModeOrder total = ModeOrder::total_order(cutoff);
    const RelationReport rep = verify_relations(total, StatisticsKind::monotone, cutoff,
                                                n_max, capacity);
    auto emit = [&](const std::string& name, double dev) {
        const bool ok = dev == 0.0;
        csv_row(os, name, std::string("interior"), dev, ok);
        log.check(ok, "fock." + name, "nonzero deviation " + csv_num(dev));
    };
    emit("creation_pair", rep.creation_pair_dev);
    emit("annihilation_pair", rep.annihilation_pair_dev);
    emit("mixed_pair", rep.mixed_dev);
    emit("commutation", rep.commutation_dev);
    emit("adjoint", rep.adjoint_dev);
    csv_row(os, std::string("boundary"), std::string("reported"), rep.boundary_dev, true);

    // Counting identities on the total order.
    for (std::size_t n = 0; n <= n_max; ++n) {
        const std::uint64_t mono = count_basis(total, StatisticsKind::monotone, n, cutoff);
        const std::uint64_t weak =
            count_basis(total, StatisticsKind::weakly_monotone_total, n, cutoff);
        const std::uint64_t full =
            count_basis(total, StatisticsKind::full_distinguishable, n, cutoff);
        std::uint64_t pw = 1;
        for (std::size_t i = 0; i < n; ++i) pw = sat_mul(pw, cutoff);
        const bool ok = mono == binomial_checked(cutoff, n) &&
                        weak == binomial_checked(cutoff + n - (n ? 1 : 0), n) && full == pw;
        csv_row(os, std::string("counting"), "n=" + csv_num(n), ok ? 0.0 : 1.0, ok);
        log.check(ok, "fock.counting", "count mismatch at n=" + csv_num(n));
    }

    // Singleton blocks must reduce block-monotone to plain monotone.
    bool equal = true;
    for (std::size_t n = 0; n <= n_max && equal; ++n)
        equal = enumerate_basis(total, StatisticsKind::block_monotone, n, cutoff, capacity) ==
                enumerate_basis(total, StatisticsKind::monotone, n, cutoff, capacity);
    csv_row(os, std::string("singleton_equivalence"), std::string("block==total"),
            equal ? 0.0 : 1.0, equal);
    log.check(equal, "fock.singleton_equivalence", "bases differ");

    return log.finish();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grand-canonical series, bounds and Fock-space checks for "
                 "monotone and block-monotone statistics"};
    app.require_subcommand(1);

    SpectrumOpts sopt;
    PointOpts popt;
    std::string kind = "monotone";
    std::string kinds_csv = "boltzmann,monotone";
    std::string out = "-";
    std::size_t n_max = 0;
    std::size_t cutoff = 0;
    double gamma = 0.5;
    std::size_t rpath = 0;
    bool both_engines = false;
    std::size_t fit_nmin = 1, fit_nmax = 20;
    std::size_t scan_nmin = 1, scan_nmax = 20, scan_points = 1000;
    std::size_t fc_cutoff = 8, fc_nmax = 3;

    auto* zeta_cmd = app.add_subcommand("zeta", "one-particle partition sums");
    sopt.attach(zeta_cmd);
    popt.attach(zeta_cmd);
    zeta_cmd->add_option("--out", out, "output CSV path or '-'");

    auto* grand_cmd = app.add_subcommand("grand", "grand-partition values");
    sopt.attach(grand_cmd);
    popt.attach(grand_cmd);
    grand_cmd->add_option("--kind", kind, "boltzmann|full|monotone|weakly-monotone|"
                                          "block-monotone|block-weakly-monotone");
    grand_cmd->add_option("--nmax", n_max, "truncation order (0 = automatic)");
    grand_cmd->add_option("--mode-cutoff", cutoff, "modes retained (0 = automatic)");
    grand_cmd->add_flag("--both-engines", both_engines,
                        "also evaluate the closed-form route and the gap");
    grand_cmd->add_option("--out", out, "output CSV path or '-'");

    auto* coeffs_cmd = app.add_subcommand("coeffs", "expansion coefficients at one point");
    sopt.attach(coeffs_cmd);
    popt.attach(coeffs_cmd, false);
    coeffs_cmd->add_option("--kind", kind);
    coeffs_cmd->add_option("--nmax", n_max, "truncation order (0 = automatic)");
    coeffs_cmd->add_option("--mode-cutoff", cutoff, "modes retained (0 = automatic)");
    coeffs_cmd->add_option("--out", out, "output CSV path or '-'");

    auto* bounds_cmd = app.add_subcommand("bounds", "sandwich bound scan / region-R path");
    sopt.attach(bounds_cmd);
    popt.attach(bounds_cmd);
    bounds_cmd->add_option("--gamma", gamma, "region-R exponent in (0,1)");
    bounds_cmd->add_option("--rpath", rpath, "emit K points of the shrinking-z path");
    bounds_cmd->add_option("--out", out, "output CSV path or '-'");

    auto* appendix_cmd =
        app.add_subcommand("appendix", "second-derivative scan and quartic fit");
    appendix_cmd->add_option("--fit-nmin", fit_nmin);
    appendix_cmd->add_option("--fit-nmax", fit_nmax);
    appendix_cmd->add_option("--scan-nmin", scan_nmin);
    appendix_cmd->add_option("--scan-nmax", scan_nmax);
    appendix_cmd->add_option("--scan-points", scan_points, "log-spaced x samples in (1,10]");
    appendix_cmd->add_option("--out", out, "output directory")->default_val(".");

    auto* scan_cmd = app.add_subcommand("scan", "observables comparison table");
    sopt.attach(scan_cmd);
    popt.attach(scan_cmd);
    scan_cmd->add_option("--kinds", kinds_csv, "comma list incl. 'boltzmann'");
    scan_cmd->add_option("--nmax", n_max, "truncation order (0 = automatic)");
    scan_cmd->add_option("--mode-cutoff", cutoff, "modes retained (0 = automatic)");
    scan_cmd->add_option("--out", out, "output CSV path or '-'");

    auto* fock_cmd = app.add_subcommand("fock-check", "operator-relation verification");
    std::string dump_basis;
    fock_cmd->add_option("--mode-cutoff", fc_cutoff);
    fock_cmd->add_option("--nmax", fc_nmax);
    fock_cmd->add_option("--dump-basis", dump_basis,
                         "also write the enumerated monotone bases to this CSV");
    fock_cmd->add_option("--out", out, "output CSV path or '-'");

    CLI11_PARSE(app, argc, argv);

    try {
        if (zeta_cmd->parsed()) return cmd_zeta(sopt, popt, out);
        if (grand_cmd->parsed())
            return cmd_grand(sopt, popt, kind, n_max, cutoff, both_engines, out);
        if (coeffs_cmd->parsed()) return cmd_coeffs(sopt, popt, kind, n_max, cutoff, out);
        if (bounds_cmd->parsed()) return cmd_bounds(sopt, popt, gamma, rpath, out);
        if (appendix_cmd->parsed())
            return cmd_appendix(fit_nmin, fit_nmax, scan_nmin, scan_nmax, scan_points, out);
        if (scan_cmd->parsed()) return cmd_scan(sopt, popt, kinds_csv, n_max, cutoff, out);
        if (fock_cmd->parsed()) return cmd_fock_check(fc_cutoff, fc_nmax, dump_basis, out);
    } catch (const std::exception& e) {
        nlohmann::json err = {{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
    return 0;
}
