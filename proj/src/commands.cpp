#include "pinning/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "pinning/determinant.hpp"
#include "pinning/disorder.hpp"
#include "pinning/errors.hpp"
#include "pinning/fractional_moment.hpp"
#include "pinning/gradient_annealed.hpp"
#include "pinning/gradient_model.hpp"
#include "pinning/laplacian_model.hpp"

namespace pinning::cli {

using nlohmann::json;

namespace {

double rel_err(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), std::numeric_limits<double>::min()); }

void record_case(SuiteResult& s, double err, double tol, const std::string& what)
{
    ++s.cases;
    s.max_rel_error = std::max(s.max_rel_error, err);
    if (!(err <= tol) && s.passed) {
        s.passed = false;
        s.counterexample = what;
    }
}

std::string describe(const std::vector<double>& v)
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? "," : "") << format_number(v[i]);
    os << ']';
    return os.str();
}

} // namespace

std::vector<SuiteResult> verify_lemmas(int max_n, int cases, std::uint64_t seed, bool corrupt)
{
    if (max_n < 1 || cases < 0)
        throw UsageError("max_n >= 1 and cases >= 0 required");
    std::vector<SuiteResult> out;
    std::uniform_real_distribution<double> pos(0.1, 10.0);

    SuiteResult grad{"gradient_tridiagonal", 0, 0.0, true, {}};
    {
        auto eng = disorder::make_engine(seed, 1);
        for (int c = 0; c < cases; ++c) {
            // matrix dimension len - 1 in [1, max_n]
            const int len = 2 + static_cast<int>(eng() % static_cast<std::uint64_t>(max_n));
            std::vector<double> a(len);
            for (double& x : a)
                x = pos(eng);
            double closed = gradient::det_gradient(a);
            if (corrupt)
                closed *= 1.0 + 1e-6;
            const double dense = dense_determinant(gradient::gradient_matrix(a));
            record_case(grad, rel_err(closed, dense), 1e-10, "a=" + describe(a));
        }
    }
    out.push_back(grad);

    SuiteResult lap{"laplacian_pentadiagonal", 0, 0.0, true, {}};
    {
        auto eng = disorder::make_engine(seed, 2);
        for (int c = 0; c < cases; ++c) {
            const int n = 2 + static_cast<int>(eng() % static_cast<std::uint64_t>(max_n));
            std::vector<double> b(static_cast<std::size_t>(n) + 1);
            for (double& x : b)
                x = pos(eng);
            const double closed = laplacian::det_laplacian_full(b);
            const double dense = dense_determinant(laplacian::laplacian_matrix(b));
            record_case(lap, rel_err(closed, dense), 1e-10, "b=" + describe(b));
        }
    }
    out.push_back(lap);

    SuiteResult mono{"monomial_structure", 0, 0.0, true, {}};
    {
        auto eng = disorder::make_engine(seed, 3);
        const int top = std::min(max_n, 8);
        for (int n = 2; n <= top; ++n) {
            const int m = n - 1;
            for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
                std::vector<int> pinned;
                for (int s = 1; s <= m; ++s)
                    if (mask & (1u << (s - 1)))
                        pinned.push_back(s);
                const auto poly = laplacian::monomial_determinant(n, pinned);
                const int r = static_cast<int>(pinned.size());
                std::string what = "N=" + std::to_string(n) + " pinned mask=" + std::to_string(mask);
                bool ok = poly.square_free() && poly.positive_coefficients()
                          && poly.uniform_degree() == (r == m ? 0 : n - 1 - r);
                std::vector<double> ones(static_cast<std::size_t>(n) + 1, 1.0);
                const double at_ones = r == m ? 1.0 : laplacian::det_laplacian_pinned(ones, pinned);
                ok = ok && std::llround(at_ones) == poly.coefficient_sum();
                std::vector<double> x(static_cast<std::size_t>(n) + 1);
                for (double& v : x)
                    v = pos(eng);
                const double numeric = r == m ? 1.0 : laplacian::det_laplacian_pinned(x, pinned);
                const double err = rel_err(poly.evaluate(x), numeric);
                record_case(mono, ok ? err : std::numeric_limits<double>::infinity(), 1e-9, what);
            }
        }
    }
    out.push_back(mono);
    return out;
}

namespace {

struct Global {
    int threads = 0;
    std::string format = "json";
    std::string out_path;
};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

ResultValue from_bracket(double v, const Bracket& b) { return ResultValue::bracketed(v, b.lower, b.upper); }
ResultValue from_mc(const McEstimate& e) { return ResultValue::estimate(e.mean, e.std_error); }

json certificate_json(const fm::GapCertificate& g)
{
    json a = json::array();
    for (std::size_t s = 0; s < g.a.size(); ++s)
        a.push_back({{"s", s}, {"value", number_to_json(g.a[s].value)}, {"se", number_to_json(g.a[s].std_error)},
                     {"mode", fm::to_string(g.a[s].mode)}});
    return {{"beta", g.beta},
            {"d", g.d},
            {"c", g.c},
            {"delta", g.delta},
            {"gamma", g.gamma},
            {"k", g.k},
            {"eps", g.eps},
            {"eps_annealed", g.eps_annealed},
            {"fbar", g.fbar},
            {"n_truncation", g.n_truncation},
            {"exact_s_cutoff", g.exact_s_cutoff},
            {"mc_samples", g.mc_samples},
            {"window", g.window},
            {"seed", g.seed},
            {"budget", g.budget},
            {"estimated_cost", g.estimated_cost},
            {"rho_value", number_to_json(g.rho_value)},
            {"rho_tail_bound", number_to_json(g.rho_tail_bound)},
            {"mc_inflation", number_to_json(g.mc_inflation)},
            {"rho_upper", number_to_json(g.rho_upper())},
            {"verdict", fm::to_string(g.verdict)},
            {"vacuous", g.vacuous},
            {"experimental", g.experimental},
            {"diagnostic", g.diagnostic},
            {"assumption", "disorder windows of A_s and of the bridging step are independent"},
            {"a", a}};
}

laplacian::Normalization parse_norm(const std::string& s)
{
    if (s == "per-return")
        return laplacian::Normalization::PerReturn;
    if (s == "per-return-plus-one")
        return laplacian::Normalization::PerReturnPlusOne;
    throw UsageError("unknown normalization " + s);
}

void emit(const RunRecord& rec, const Global& g, std::ostream& out)
{
    std::ofstream file;
    std::ostream* os = &out;
    if (!g.out_path.empty()) {
        file.open(g.out_path);
        if (!file)
            throw UsageError("cannot open output file " + g.out_path);
        os = &file;
    }
    if (g.format == "csv") {
        if (rec.details.contains("rows")) {
            // phase diagram: the rows are the data file
            const auto& rows = rec.details["rows"];
            const auto& cols = rec.details["columns"];
            for (std::size_t i = 0; i < cols.size(); ++i)
                *os << (i ? "," : "") << cols[i].get<std::string>();
            *os << '\n';
            for (const auto& r : rows) {
                for (std::size_t i = 0; i < r.size(); ++i)
                    *os << (i ? "," : "") << format_number(number_from_json(r[i]));
                *os << '\n';
            }
        } else {
            *os << rec.to_csv();
        }
    } else {
        *os << rec.to_json().dump(2) << '\n';
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Numerical laboratory for disordered polymer pinning models", "pinning"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--threads", g.threads, "worker threads (1 = serial reference path; never changes output)")
        ->check(CLI::NonNegativeNumber);
    auto* o_format = app.add_option("--format", g.format, "json or csv (phase-diagram defaults to csv)")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--out", g.out_path, "write output to this file");

    RunRecord rec;
    int exit_code = Ok;
    std::function<void()> action;

    // verify-lemmas
    auto* verify = app.add_subcommand("verify-lemmas", "determinant identities and monomial structure");
    int v_max_n = 12, v_cases = 500;
    std::uint64_t v_seed = 1;
    bool v_corrupt = false;
    verify->add_option("--max-n", v_max_n)->check(CLI::PositiveNumber);
    verify->add_option("--cases", v_cases)->check(CLI::NonNegativeNumber);
    verify->add_option("--seed", v_seed);
    verify->add_flag("--corrupt", v_corrupt, "perturb the tridiagonal closed form (negative control)");
    verify->callback([&] {
        action = [&] {
            rec.command = "verify-lemmas";
            rec.params = {{"max_n", v_max_n}, {"cases", v_cases}, {"seed", v_seed}, {"corrupt", v_corrupt}};
            rec.seed = v_seed;
            const auto suites = verify_lemmas(v_max_n, v_cases, v_seed, v_corrupt);
            json det = json::array();
            bool all = true;
            for (const auto& s : suites) {
                rec.results[s.name + ".max_rel_error"] = ResultValue::exact(s.max_rel_error);
                rec.results[s.name + ".passed"] = ResultValue::exact(s.passed ? 1.0 : 0.0);
                det.push_back({{"suite", s.name}, {"cases", s.cases}, {"passed", s.passed},
                               {"counterexample", s.counterexample}});
                all = all && s.passed;
                if (!s.passed)
                    err << "FAIL " << s.name << ": " << s.counterexample << '\n';
            }
            rec.details["suites"] = det;
            if (!all)
                exit_code = ComputationFailure;
        };
    });

    // gradient
    auto* grad = app.add_subcommand("gradient", "gradient model");
    grad->require_subcommand(1);
    int gd = 1, gn = 100;
    double gbeta = 0.0, geps = 0.0, gdelta = 0.0;
    std::uint64_t gseed = 1;
    std::size_t gsamples = 200;
    std::string gendpoint = "pinned", gnorm = "ratio";
    std::int64_t gnmax = 100000;

    auto* gpart = grad->add_subcommand("partition", "log Zcal_N for one disorder draw");
    gpart->add_option("--d", gd)->check(CLI::PositiveNumber);
    gpart->add_option("--beta", gbeta)->required();
    gpart->add_option("--eps", geps)->required();
    gpart->add_option("--n", gn)->required()->check(CLI::PositiveNumber);
    gpart->add_option("--seed", gseed);
    gpart->add_option("--endpoint", gendpoint)->check(CLI::IsMember({"pinned", "free"}));
    gpart->callback([&] {
        action = [&] {
            rec.command = "gradient partition";
            rec.params = {{"d", gd}, {"beta", gbeta}, {"eps", geps}, {"n", gn}, {"seed", gseed}, {"endpoint", gendpoint}};
            rec.seed = gseed;
            gradient::GradientParams p{gd, gbeta, geps, gn,
                                       gendpoint == "free" ? gradient::Endpoint::Free : gradient::Endpoint::Pinned};
            p.validate();
            const auto om = disorder::sample(disorder::DisorderLaw::Rademacher, static_cast<std::size_t>(gn), gseed, 0);
            rec.results["log_partition"] = ResultValue::exact(gradient::adjusted_partition(om, p).log_value);
            rec.results["log_raw_partition_eps0"] = ResultValue::exact(gradient::raw_partition_eps0(om, p).log_value);
            if (p.endpoint == gradient::Endpoint::Pinned && gn <= 20)
                rec.results["log_partition_enumerated"]
                    = ResultValue::exact(gradient::enumerate_partition_oracle(om, p).log_value);
        };
    });

    auto* gfe = grad->add_subcommand("free-energy", "quenched Monte Carlo and annealed free energy");
    gfe->add_option("--d", gd)->check(CLI::PositiveNumber);
    gfe->add_option("--beta", gbeta)->required();
    auto* o_eps = gfe->add_option("--eps", geps);
    auto* o_delta = gfe->add_option("--delta-over-annealed", gdelta, "eps = eps_c^a(beta) e^delta");
    o_eps->excludes(o_delta);
    gfe->add_option("--n", gn)->required()->check(CLI::PositiveNumber);
    gfe->add_option("--samples", gsamples)->check(CLI::Range(2, 100000000));
    gfe->add_option("--seed", gseed);
    gfe->add_option("--normalization", gnorm)->check(CLI::IsMember({"ratio", "adjusted"}));
    gfe->callback([&] {
        action = [&] {
            if (o_eps->count() == 0 && o_delta->count() == 0)
                throw UsageError("one of --eps or --delta-over-annealed is required");
            rec.command = "gradient free-energy";
            rec.seed = gseed;
            double eps = geps;
            if (o_delta->count()) {
                if (gd < 3)
                    throw UsageError("--delta-over-annealed needs d >= 3 (eps_c^a = 0 otherwise)");
                eps = gradient::annealed_critical_point(gbeta, gd).value * std::exp(gdelta);
                rec.params = {{"d", gd}, {"beta", gbeta}, {"delta_over_annealed", gdelta}};
            } else {
                rec.params = {{"d", gd}, {"beta", gbeta}, {"eps", geps}};
            }
            rec.params["n"] = gn;
            rec.params["samples"] = gsamples;
            rec.params["seed"] = gseed;
            rec.params["normalization"] = gnorm;
            gradient::GradientParams p{gd, gbeta, eps, gn, gradient::Endpoint::Pinned};
            p.validate();
            const auto norm = gnorm == "ratio" ? gradient::FreeEnergyNormalization::Ratio
                                               : gradient::FreeEnergyNormalization::Adjusted;
            rec.results["eps"] = ResultValue::exact(eps);
            rec.results["quenched_free_energy"]
                = from_mc(gradient::quenched_free_energy_mc(p, gsamples, gseed, norm, Execution{g.threads}));
            const auto fa = gradient::annealed_free_energy(gbeta, eps, gd);
            rec.results["annealed_free_energy"] = from_bracket(fa.value, fa.bracket);
            if (eps > 0.0 && gn <= 5000) {
                const auto ez = gradient::annealed_partition_expectation(gbeta, eps, gd, gn);
                rec.results["annealed_free_energy_n"] = ResultValue::exact(std::log(ez[gn]) / gn);
            }
        };
    });

    auto* gann = grad->add_subcommand("annealed", "annealed critical point and free energy");
    gann->add_option("--d", gd)->required()->check(CLI::PositiveNumber);
    gann->add_option("--beta", gbeta)->required();
    auto* o_aeps = gann->add_option("--eps", geps);
    gann->add_option("--n-max", gnmax)->check(CLI::Range(std::int64_t{1000}, std::int64_t{10000000}));
    gann->callback([&] {
        action = [&] {
            rec.command = "gradient annealed";
            rec.params = {{"d", gd}, {"beta", gbeta}, {"n_max", gnmax}};
            if (o_aeps->count())
                rec.params["eps"] = geps;
            gradient::AnnealedOptions opt;
            opt.n_max = gnmax;
            const auto cp = gradient::annealed_critical_point(gbeta, gd, opt);
            rec.results["eps_c_annealed"] = from_bracket(cp.value, cp.bracket);
            if (gd >= 3) {
                const auto tf = gradient::annealed_critical_point_tilted_form(gbeta, gd, opt);
                rec.results["eps_c_annealed_tilted"] = from_bracket(tf.value, tf.bracket);
                rec.results["eps_c0"] = ResultValue::exact(gradient::epsilon_c0(gd));
                const auto b = gradient::tilted_bundle(gbeta, gd, gnmax);
                rec.results["R"] = from_bracket(b.r.mid(), b.r);
                if (gd >= 5)
                    rec.results["C"] = from_bracket(b.c_beta.mid(), b.c_beta);
            }
            if (o_aeps->count()) {
                const auto fa = gradient::annealed_free_energy(gbeta, geps, gd, opt);
                rec.results["annealed_free_energy"] = from_bracket(fa.value, fa.bracket);
            }
        };
    });

    auto* gcert = grad->add_subcommand("certify", "fractional-moment gap certificate");
    std::vector<double> cs;
    fm::CertifyOptions copt;
    bool call = false;
    gcert->add_option("--d", gd)->required()->check(CLI::PositiveNumber);
    gcert->add_option("--beta", gbeta)->required();
    gcert->add_option("--c", cs, "one or more constants; stops at the first Certified unless --all")->required();
    gcert->add_option("--budget", copt.budget, "kernel evaluations allowed for the sampler");
    gcert->add_option("--samples", copt.mc_samples)->check(CLI::Range(2, 100000000));
    gcert->add_option("--seed", copt.seed);
    gcert->add_option("--exact-cutoff", copt.exact_s_cutoff)->check(CLI::Range(0, 20));
    gcert->add_option("--window", copt.window)->check(CLI::PositiveNumber);
    gcert->add_option("--n-truncation", copt.n_truncation)->check(CLI::PositiveNumber);
    gcert->add_flag("--experimental", copt.experimental, "allow d = 3, 4");
    gcert->add_flag("--all", call, "evaluate every c");
    gcert->callback([&] {
        action = [&] {
            rec.command = "gradient certify";
            rec.params = {{"d", gd},
                          {"beta", gbeta},
                          {"c", cs},
                          {"budget", copt.budget},
                          {"samples", copt.mc_samples},
                          {"seed", copt.seed},
                          {"exact_cutoff", copt.exact_s_cutoff},
                          {"window", copt.window},
                          {"n_truncation", copt.n_truncation},
                          {"experimental", copt.experimental},
                          {"all", call}};
            rec.seed = copt.seed;
            if (gd < 5 && !copt.experimental)
                throw Unsupported("certificate is defined for d >= 5 (use --experimental for d = 3, 4)");
            const auto bundle = gradient::tilted_bundle(gbeta, gd);
            json certs = json::array();
            bool any = false;
            for (double c : cs) {
                const auto cert = fm::certify_gap(gbeta, gd, c, bundle, copt, Execution{g.threads});
                const std::string tag = "@c=" + format_number(c);
                rec.results["rho_value" + tag] = ResultValue::exact(cert.rho_value);
                rec.results["rho_upper" + tag] = ResultValue::exact(cert.rho_upper());
                rec.results["k" + tag] = ResultValue::exact(static_cast<double>(cert.k));
                rec.results["certified" + tag] = ResultValue::exact(cert.verdict == fm::Verdict::Certified ? 1 : 0);
                certs.push_back(certificate_json(cert));
                any = any || cert.verdict == fm::Verdict::Certified;
                if (cert.verdict == fm::Verdict::Certified && !call)
                    break;
            }
            rec.results["certified"] = ResultValue::exact(any ? 1.0 : 0.0);
            rec.details["certificates"] = certs;
        };
    });

    // laplacian
    auto* lap = app.add_subcommand("laplacian", "Laplacian model");
    lap->require_subcommand(1);
    int ln = 3, lnmax = 22;
    double lbeta = 0.0, leps = 0.0;
    std::uint64_t lseed = 1;
    std::vector<int> lpinned;
    std::string lnorm = "per-return";
    std::size_t lsamples = 10000;
    std::vector<double> ldeltas{0.3, 0.1, 0.03};

    auto* ldet = lap->add_subcommand("det", "pinned Laplacian determinant");
    ldet->add_option("--n", ln)->required()->check(CLI::Range(2, 2000));
    ldet->add_option("--beta", lbeta);
    ldet->add_option("--pinned", lpinned, "pinned interior sites in 1..N-1");
    ldet->add_option("--seed", lseed);
    ldet->callback([&] {
        action = [&] {
            rec.command = "laplacian det";
            rec.params = {{"n", ln}, {"beta", lbeta}, {"pinned", lpinned}, {"seed", lseed}};
            rec.seed = lseed;
            if (!(lbeta >= 0.0))
                throw DomainError("beta must be nonnegative");
            std::vector<double> b(static_cast<std::size_t>(ln) + 1, 1.0);
            if (lbeta > 0.0) {
                const auto om = disorder::sample(disorder::DisorderLaw::StandardNormal, b.size(), lseed, 0);
                for (std::size_t i = 0; i < b.size(); ++i)
                    b[i] = std::exp(lbeta * om[i]);
            }
            const bool all_pinned = static_cast<int>(lpinned.size()) == ln - 1;
            rec.results["det"]
                = ResultValue::exact(all_pinned ? 1.0 : laplacian::det_laplacian_pinned(b, lpinned));
            if (ln <= 200)
                rec.results["det_dense"] = ResultValue::exact(
                    all_pinned ? 1.0 : dense_determinant(laplacian::laplacian_pinned_matrix(b, lpinned)));
            if (lpinned.empty())
                rec.results["det_closed_form"] = ResultValue::exact(laplacian::det_laplacian_full(b));
            if (lpinned.empty() && lbeta == 0.0 && ln <= 60)
                rec.results["det_exact_integer"]
                    = ResultValue::exact(static_cast<double>(laplacian::det_laplacian_homogeneous_exact(ln)));
        };
    });

    auto* lpart = lap->add_subcommand("partition", "exact adjusted partition function");
    lpart->add_option("--n", ln)->required()->check(CLI::Range(2, 22));
    lpart->add_option("--beta", lbeta)->required();
    lpart->add_option("--eps", leps)->required();
    lpart->add_option("--seed", lseed);
    lpart->add_option("--normalization", lnorm)->check(CLI::IsMember({"per-return", "per-return-plus-one"}));
    lpart->callback([&] {
        action = [&] {
            rec.command = "laplacian partition";
            rec.params = {{"n", ln}, {"beta", lbeta}, {"eps", leps}, {"seed", lseed}, {"normalization", lnorm}};
            rec.seed = lseed;
            laplacian::LaplacianParams p{lbeta, leps, ln, parse_norm(lnorm)};
            p.validate();
            const auto om = disorder::sample(disorder::DisorderLaw::StandardNormal, static_cast<std::size_t>(ln) + 1, lseed, 0);
            rec.results["log_partition"]
                = ResultValue::exact(laplacian::laplacian_partition_exact(om.values, p, Execution{g.threads}).log_value);
        };
    });

    auto* lfe = lap->add_subcommand("free-energy", "non-random free energy from the no-double-return renewal");
    lfe->add_option("--eps", leps)->required();
    lfe->add_option("--n-max", lnmax)->check(CLI::Range(12, 22));
    lfe->add_option("--probe-deltas", ldeltas);
    lfe->callback([&] {
        action = [&] {
            rec.command = "laplacian free-energy";
            rec.params = {{"eps", leps}, {"n_max", lnmax}, {"probe_deltas", ldeltas}};
            const auto t = laplacian::homogeneous_table(lnmax, Execution{g.threads});
            const auto f = laplacian::laplacian_nonrandom_free_energy(t, leps);
            rec.results["free_energy"] = from_bracket(f.value, f.bracket);
            rec.results["tail_constant"] = from_bracket(f.tail_c, f.tail_c_range);
            const auto ec = laplacian::laplacian_critical_point(t);
            rec.results["eps_c"] = from_bracket(ec.value, ec.bracket);
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (double dl : ldeltas) {
                const double gv = laplacian::second_order_probe(t, ec.value, dl);
                rec.results["g@delta=" + format_number(dl)] = ResultValue::exact(gv);
                lo = std::min(lo, gv);
                hi = std::max(hi, gv);
            }
            if (!ldeltas.empty())
                rec.results["g_variation"] = ResultValue::exact(hi / lo - 1.0);
        };
    });

    auto* lsand = lap->add_subcommand("sandwich", "annealed bounds from the homogeneous model");
    lsand->add_option("--n", ln)->required()->check(CLI::Range(2, 18));
    lsand->add_option("--beta", lbeta)->required();
    lsand->add_option("--eps", leps)->required();
    lsand->add_option("--samples", lsamples)->check(CLI::Range(2, 100000000));
    lsand->add_option("--seed", lseed);
    lsand->add_option("--normalization", lnorm)->check(CLI::IsMember({"per-return", "per-return-plus-one"}));
    lsand->callback([&] {
        action = [&] {
            rec.command = "laplacian sandwich";
            rec.params = {{"n", ln},         {"beta", lbeta}, {"eps", leps}, {"samples", lsamples},
                          {"seed", lseed}, {"normalization", lnorm}};
            rec.seed = lseed;
            const auto s = laplacian::annealed_sandwich(lbeta, leps, ln, lsamples, lseed, parse_norm(lnorm),
                                                        Execution{g.threads});
            rec.results["lower"] = ResultValue::exact(s.lower);
            rec.results["annealed_partition"] = from_mc(s.annealed);
            rec.results["upper"] = ResultValue::exact(s.upper);
            // rounding slack for the beta = 0 case, where all three coincide
            const double lo = s.lower - 3.0 * s.annealed.std_error - 1e-12 * s.lower;
            const double hi = s.upper + 3.0 * s.annealed.std_error + 1e-12 * s.upper;
            rec.results["holds"] = ResultValue::exact((lo <= s.annealed.mean && s.annealed.mean <= hi) ? 1.0 : 0.0);
            using disorder::DisorderLaw;
            rec.results["critical_ratio_lower"]
                = ResultValue::exact(1.0 / disorder::mgf(DisorderLaw::StandardNormal, lbeta / 2.0));
            rec.results["critical_ratio_upper"]
                = ResultValue::exact(std::sqrt(disorder::mgf(DisorderLaw::StandardNormal, -lbeta)));
        };
    });

    // phase diagram
    auto* phase = app.add_subcommand("phase-diagram", "sweep a (beta, eps) grid");
    std::string pmodel = "gradient";
    std::vector<double> pbetas, pepss;
    int pd = 3, pn = 500;
    std::size_t psamples = 50;
    std::uint64_t pseed = 1;
    phase->add_option("--model", pmodel)->check(CLI::IsMember({"gradient", "laplacian"}));
    phase->add_option("--d", pd)->check(CLI::PositiveNumber);
    phase->add_option("--betas", pbetas)->required();
    phase->add_option("--eps,--epss", pepss)->required();
    phase->add_option("--n", pn)->check(CLI::PositiveNumber);
    phase->add_option("--samples", psamples)->check(CLI::Range(2, 100000000));
    phase->add_option("--seed", pseed);
    phase->callback([&] {
        action = [&] {
            rec.command = "phase-diagram";
            rec.params = {{"model", pmodel}, {"betas", pbetas}, {"eps", pepss}, {"n", pn}, {"samples", psamples},
                          {"seed", pseed}};
            if (pmodel == "gradient")
                rec.params["d"] = pd;
            rec.seed = pseed;
            if (pbetas.empty() || pepss.empty())
                throw UsageError("empty grid");
            json rows = json::array();
            if (pmodel == "gradient") {
                rec.details["columns"] = {"beta",    "eps",        "Fa",         "Fa_lower",   "Fa_upper",
                                          "Fq_mean", "Fq_se",      "epsc_a",     "epsc_a_lower", "epsc_a_upper"};
                for (double b : pbetas) {
                    const auto cp = gradient::annealed_critical_point(b, pd);
                    for (double e : pepss) {
                        const auto fa = gradient::annealed_free_energy(b, e, pd);
                        gradient::GradientParams p{pd, b, e, pn, gradient::Endpoint::Pinned};
                        const auto q = gradient::quenched_free_energy_mc(
                            p, psamples, pseed, gradient::FreeEnergyNormalization::Ratio, Execution{g.threads});
                        rows.push_back({b, e, fa.value, fa.bracket.lower, fa.bracket.upper, q.mean, q.std_error,
                                        cp.value, cp.bracket.lower, cp.bracket.upper});
                    }
                }
            } else {
                if (pn > 22)
                    throw UsageError("laplacian sweep uses exact enumeration; --n <= 22");
                rec.details["columns"] = {"beta", "eps", "Fq_mean", "Fq_se", "log_mean_Z_over_n"};
                for (double b : pbetas)
                    for (double e : pepss) {
                        laplacian::LaplacianParams p{b, e, pn, laplacian::Normalization::PerReturn};
                        const auto logs = laplacian::laplacian_log_partition_samples(p, psamples, pseed,
                                                                                     Execution{g.threads});
                        std::vector<double> fq(logs.size());
                        for (std::size_t i = 0; i < logs.size(); ++i)
                            fq[i] = logs[i] / pn;
                        const auto q = summarize(fq);
                        const double lm = log_sum_exp(std::span<const double>(logs)) - std::log(double(logs.size()));
                        rows.push_back({b, e, q.mean, q.std_error, lm / pn});
                    }
            }
            rec.results["points"] = ResultValue::exact(static_cast<double>(rows.size()));
            rec.details["rows"] = rows;
        };
    });

    std::vector<std::string> argv_s{"pinning"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_s)
        argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return UsageFailure;
    }
    if (!action) {
        err << "usage error: no command\n";
        return UsageFailure;
    }
    try {
        const auto t0 = Clock::now();
        action();
        rec.wall_ms = elapsed_ms(t0);
        if (rec.command == "phase-diagram" && o_format->count() == 0)
            g.format = "csv";
        emit(rec, g, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return UsageFailure;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << '\n';
        return UsageFailure;
    } catch (const Unsupported& e) {
        err << "usage error: " << e.what() << '\n';
        return UsageFailure;
    } catch (const Inconsistency& e) {
        err << "computation failure: " << e.what() << '\n';
        return ComputationFailure;
    } catch (const std::exception& e) {
        err << "computation failure: " << e.what() << '\n';
        return ComputationFailure;
    }
    return exit_code;
}

} // namespace pinning::cli
