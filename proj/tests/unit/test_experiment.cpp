#include <doctest.h>

#include <msfem/error.hpp>
#include <msfem/experiment.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace msfem;
namespace fs = std::filesystem;

namespace {

ExperimentConfig config_from(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in).front();
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("msfem_test_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("mesh resolution for a sweep")
{
    const ExperimentConfig c = config_from("example = 1\neps = 1/40\n");
    CHECK(fine_cells(c, 1, 1.0 / 40) == 2560);
    const Resolution r = resolve(c, 1.0 / 40, 1.0 / 16);
    CHECK(r.coarse_n == 640);
    CHECK(r.fine_n == 2560);
    CHECK_THROWS_AS(resolve(c, 1.0 / 40, 1.0 / 3), ConfigError);
    CHECK_THROWS_AS(resolve(c, 1.0 / 40, 1.0 / 128), ConfigError);
    const auto t = sample_times(1.0, 11);
    CHECK(t.size() == 11);
    CHECK(t[5] == doctest::Approx(0.5));
    CHECK(t.back() == 1.0);
}

TEST_CASE("free plane wave sweep reaches the reference noise floor")
{
    const fs::path out = scratch("plane_wave");
    ExperimentConfig c = config_from("example = custom\npotential = constant\nvalue = 0\neps = 1/4\n"
                                     "ratios = 1/32, 1/64, 1/128\nh = 1/1024\nk_ref = 1/1000\nscheme = gauss8\n"
                                     "initial = plane_wave\nl_star = scaled\n");
    c.output_dir = out.string();
    const ConvergenceResult result = run_convergence(c);
    REQUIRE(result.failures.empty());
    REQUIRE(result.table.size() == 3);
    for (const ErrorReport& row : result.table)
        MESSAGE("H/eps " << row.H_over_eps << ": L2 " << row.err_l2 << ", H1 " << row.err_h1);
    CHECK(result.table.back().err_l2 <= 1e-6);
    CHECK(fs::exists(out / "errors.csv"));
    CHECK(fs::exists(out / "conservation.csv"));
    const std::string manifest = slurp(out / "manifest.txt");
    CHECK(manifest.find("l_star = scaled") != std::string::npos);
    CHECK(manifest.find("reference_mass_drift") != std::string::npos);
    for (const RowDiagnostics& d : result.rows) {
        CHECK(d.mass_drift <= 1e-10);
        CHECK(d.energy_drift <= 1e-10);
    }
}

TEST_CASE("reruns are bit-identical")
{
    const std::string text = "example = 1\neps = 1/8\nratios = 1/2, 1/4\nk_ref = 1/200\n";
    ExperimentConfig a = config_from(text);
    ExperimentConfig b = config_from(text);
    a.output_dir = scratch("rerun_a").string();
    b.output_dir = scratch("rerun_b").string();
    run_convergence(a);
    run_convergence(b);
    CHECK(slurp(fs::path(a.output_dir) / "errors.csv") == slurp(fs::path(b.output_dir) / "errors.csv"));
    CHECK(slurp(fs::path(a.output_dir) / "conservation.csv") == slurp(fs::path(b.output_dir) / "conservation.csv"));
}

TEST_CASE("failing rows are reported and skipped")
{
    ExperimentConfig c = config_from("example = 1\neps = 1/8\nratios = 1/2, 1/3, 1/4\nk_ref = 1/100\n");
    c.output_dir = scratch("failing_row").string();
    const ConvergenceResult result = run_convergence(c);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].H_over_eps == doctest::Approx(1.0 / 3));
    CHECK(result.table.size() == 2);
    // rates need consecutive halvings
    CHECK_FALSE(result.table[1].rate_l2.has_value());
}

TEST_CASE("decay study up to saturation")
{
    ExperimentConfig c = config_from("example = 2\neps = 1/20\ndecay_ratio = 1/4\n");
    c.output_dir = scratch("decay").string();
    const DecayResult result = run_decay(c);
    REQUIRE(result.profiles.size() == 1);
    const DecayProfile& p = result.profiles[0];
    CHECK(p.tail_energy.back() == 0.0);
    CHECK(p.e_relative.front() == doctest::Approx(1.0));
    for (std::size_t l = 0; l + 1 < p.tail_energy.size(); ++l)
        CHECK(p.tail_energy[l + 1] <= p.tail_energy[l]);
    const std::string csv = slurp(fs::path(c.output_dir) / "decay.csv");
    CHECK(csv.rfind("eps,center,level,tail_energy,e_relative", 0) == 0);
}

TEST_CASE("zero initial data gives zero densities")
{
    ExperimentConfig c = config_from("example = 1\neps = 1/8\nratios = 1/4\ninitial = zero\nk_ref = 1/100\n");
    c.output_dir = scratch("zero").string();
    const ObservablesResult r = run_observables(c);
    CHECK(r.position_ms.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.position_ref.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.energy_ms.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.energy_ref.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Example 1 densities at H/eps = 1/16")
{
    ExperimentConfig c = config_from("example = 1\neps = 1/40\nratios = 1/16\nk_ref = 1/2000\nscheme = gauss8\n"
                                     "l_star = scaled\n");
    c.output_dir = scratch("densities").string();
    const ObservablesResult r = run_observables(c);
    MESSAGE("position gap " << r.position_gap << ", energy gap " << r.energy_gap);
    CHECK(r.position_gap <= 1e-3);
    CHECK(r.energy_gap <= 5e-2);
    CHECK(fs::exists(fs::path(c.output_dir) / "density_ms.csv"));
    CHECK(fs::exists(fs::path(c.output_dir) / "density_ref.csv"));
}

TEST_CASE("basis summary")
{
    ExperimentConfig c = config_from("example = 1\neps = 1/40\nratios = 1/4\n");
    c.output_dir = scratch("basis").string();
    const BasisSummary s = run_basis(c);
    CHECK(s.coarse_vertices == 160);
    CHECK(s.fine_vertices == 2560);
    CHECK(s.l_star == 9);
    CHECK(s.constraint_residual <= 1e-8);
    CHECK(s.mesh_condition.ratio == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(fs::exists(fs::path(c.output_dir) / "basis.csv"));
}

TEST_CASE("invariant suite passes")
{
    ExperimentConfig c = config_from("example = 2\neps = 1/40\nratios = 1/8\n");
    c.output_dir = scratch("check").string();
    const auto checks = run_check(c);
    CHECK(checks.size() >= 5);
    for (const CheckResult& r : checks) {
        CAPTURE(r.name);
        CAPTURE(r.value);
        CHECK(r.pass);
    }
}
