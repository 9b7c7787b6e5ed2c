#pragma once

#include "msfem/analysis.hpp"
#include "msfem/fem.hpp"
#include "msfem/msbasis.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace msfem {

/// Creates `dir` (and parents) if needed; throws Error on failure.
void ensure_directory(const std::filesystem::path& dir);

/// H_over_eps,err_l2,rate_l2,err_h1,rate_h1 in 8-decimal fixed format; the
/// first row leaves the rate columns empty.
void write_error_table(const std::filesystem::path& path, std::span<const ErrorReport> rows);

/// vertex,x[,y],real,imag
void write_field(const std::filesystem::path& path, const SimplexLattice& lattice, const WaveField& field);

/// x[,y] followed by one column per named nodal series.
void write_nodal_series(const std::filesystem::path& path, const SimplexLattice& lattice,
                        std::span<const std::string> names, std::span<const Eigen::VectorXd> series);

/// row,col,value (zero-based), one nonzero per line.
void write_triplets(const std::filesystem::path& path, const SparseMatrix& matrix);

struct ConservationSample
{
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
};

/// t,mass,energy
void write_conservation(const std::filesystem::path& path, std::span<const ConservationSample> samples);

/// index,lambda
void write_eigenvalues(const std::filesystem::path& path, const Eigen::VectorXd& lambda);

/// eps,center,level,tail_energy,e_relative
void write_decay_profiles(const std::filesystem::path& path, std::span<const double> eps,
                          std::span<const DecayProfile> profiles);

/// Writes text verbatim.
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace msfem
