#include "msfem/io.hpp"

#include "msfem/error.hpp"

#include <fstream>
#include <iomanip>

namespace msfem {

namespace {

std::ofstream open(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        ensure_directory(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open '" + path.string() + "' for writing");
    out << std::setprecision(17);
    return out;
}

void write_coordinates(std::ostream& out, const SimplexLattice& lattice, Index v)
{
    const Point p = lattice.vertex(v);
    out << p.x;
    if (lattice.dim() == 2)
        out << ',' << p.y;
}

} // namespace

void ensure_directory(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_error_table(const std::filesystem::path& path, std::span<const ErrorReport> rows)
{
    auto out = open(path);
    out << std::fixed << std::setprecision(8);
    out << "H_over_eps,err_l2,rate_l2,err_h1,rate_h1\n";
    for (const ErrorReport& r : rows) {
        out << r.H_over_eps << ',' << r.err_l2 << ',';
        if (r.rate_l2)
            out << *r.rate_l2;
        out << ',' << r.err_h1 << ',';
        if (r.rate_h1)
            out << *r.rate_h1;
        out << '\n';
    }
}

void write_field(const std::filesystem::path& path, const SimplexLattice& lattice, const WaveField& field)
{
    auto out = open(path);
    out << (lattice.dim() == 2 ? "vertex,x,y,real,imag\n" : "vertex,x,real,imag\n");
    for (Index v = 0; v < lattice.num_vertices(); ++v) {
        out << v << ',';
        write_coordinates(out, lattice, v);
        out << ',' << field.values[v].real() << ',' << field.values[v].imag() << '\n';
    }
}

void write_nodal_series(const std::filesystem::path& path, const SimplexLattice& lattice,
                        std::span<const std::string> names, std::span<const Eigen::VectorXd> series)
{
    if (names.size() != series.size())
        throw InvalidInput("write_nodal_series: one name per series required");
    auto out = open(path);
    out << (lattice.dim() == 2 ? "x,y" : "x");
    for (const auto& name : names)
        out << ',' << name;
    out << '\n';
    for (Index v = 0; v < lattice.num_vertices(); ++v) {
        write_coordinates(out, lattice, v);
        for (const auto& s : series)
            out << ',' << s[v];
        out << '\n';
    }
}

void write_triplets(const std::filesystem::path& path, const SparseMatrix& matrix)
{
    auto out = open(path);
    out << "row,col,value\n";
    for (Eigen::Index k = 0; k < matrix.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(matrix, k); it; ++it)
            out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
}

void write_conservation(const std::filesystem::path& path, std::span<const ConservationSample> samples)
{
    auto out = open(path);
    out << "t,mass,energy\n";
    for (const auto& s : samples)
        out << s.t << ',' << s.mass << ',' << s.energy << '\n';
}

void write_eigenvalues(const std::filesystem::path& path, const Eigen::VectorXd& lambda)
{
    auto out = open(path);
    out << "index,lambda\n";
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        out << i << ',' << lambda[i] << '\n';
}

void write_decay_profiles(const std::filesystem::path& path, std::span<const double> eps,
                          std::span<const DecayProfile> profiles)
{
    if (eps.size() != profiles.size())
        throw InvalidInput("write_decay_profiles: one eps per profile required");
    auto out = open(path);
    out << "eps,center,level,tail_energy,e_relative\n";
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const DecayProfile& p = profiles[i];
        for (std::size_t l = 0; l < p.levels.size(); ++l)
            out << eps[i] << ',' << p.center << ',' << p.levels[l] << ',' << p.tail_energy[l] << ','
                << p.e_relative[l] << '\n';
    }
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    auto out = open(path);
    out << text;
}

} // namespace msfem
