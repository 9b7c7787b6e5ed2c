#pragma once

#include "msfem/reference.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace msfem {

enum class InitialData
{
    gaussian,   ///< the example's Gaussian wave packet
    plane_wave, ///< exp(2 pi i k x)
    zero,
};

/// One experiment. Mesh sizes are snapped to 1/n; a ratio whose H = eps *
/// ratio is not within 1% of such a size is rejected.
struct ExperimentConfig
{
    std::string name = "default";
    int example = 1;               ///< 1..5, or 0 for a custom potential
    std::string potential;         ///< catalog name when example = 0
    std::string potential_file;    ///< sampled CSV potential when example = 0
    int dim = 1;                   ///< dimension of a custom problem
    double eps = 1.0 / 40.0;
    double eps1 = 0.0;             ///< custom layered/checkerboard scales
    double eps2 = 0.0;
    double value = 0.0;            ///< custom constant potential
    std::vector<double> ratios{1.0 / 2, 1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32};
    double h = 0.0;                ///< fine size; 0 selects the default for the dimension
    std::optional<int> l_star;     ///< empty: default level
    bool scaled_l_star = false;    ///< grow the level with eps/H when l_star is empty
    bool global_basis = false;
    double T = 1.0;
    double k_ref = 1e-4;
    TimeScheme scheme = TimeScheme::gauss4;
    std::string output_dir = "msfem-output";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    InitialData initial = InitialData::gaussian;
    double wave_number = 1.0;
    std::vector<double> decay_eps;  ///< empty: just eps
    double decay_ratio = 0.25;      ///< H / eps for decay studies
    long dense_limit = 4096;        ///< largest N_x handled by the dense eigensolver
    int samples = 11;               ///< conservation sample times in [0, T]
};

/// Sets one key from its textual value; throws ConfigError for unknown keys
/// or malformed values. Numbers accept fractions such as 1/40.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Flat "key = value" lines, '#' comments, "[name]" starts a run. Keys before
/// the first section are defaults for every run. Without sections the result
/// is a single run.
std::vector<ExperimentConfig> parse_config(std::istream& in, const std::string& source = "<input>");
std::vector<ExperimentConfig> load_config(const std::filesystem::path& path);

/// Throws ConfigError for values outside their domain.
void validate(const ExperimentConfig& config);

/// Round-trippable key = value rendering.
std::string echo(const ExperimentConfig& config);

double parse_number(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

} // namespace msfem
