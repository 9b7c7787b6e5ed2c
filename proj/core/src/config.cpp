#include "msfem/config.hpp"

#include "msfem/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace msfem {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_plain(const std::string& text)
{
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        throw ConfigError("not a number: '" + text + "'");
    return value;
}

long parse_integer(const std::string& text)
{
    long value = 0;
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("not an integer: '" + text + "'");
    return value;
}

bool parse_bool(const std::string& text)
{
    const std::string t = lower(trim(text));
    if (t == "true" || t == "yes" || t == "1")
        return true;
    if (t == "false" || t == "no" || t == "0")
        return false;
    throw ConfigError("not a boolean: '" + text + "'");
}

std::string fraction(double x)
{
    if (x > 0.0 && x < 1.0) {
        const double inv = 1.0 / x;
        if (std::abs(inv - std::round(inv)) < 1e-9 * inv) {
            std::ostringstream s;
            s << "1/" << static_cast<long>(std::round(inv));
            return s.str();
        }
    }
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

std::string join(const std::vector<double>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        out += (i ? ", " : "") + fraction(xs[i]);
    return out;
}

} // namespace

double parse_number(const std::string& text)
{
    const std::string t = trim(text);
    const auto slash = t.find('/');
    if (slash == std::string::npos)
        return parse_plain(t);
    const double num = parse_plain(trim(t.substr(0, slash)));
    const double den = parse_plain(trim(t.substr(slash + 1)));
    if (den == 0.0)
        throw ConfigError("division by zero in '" + text + "'");
    return num / den;
}

std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            values.push_back(parse_number(item));
    if (values.empty())
        throw ConfigError("empty list: '" + text + "'");
    return values;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value)
{
    const std::string key = lower(trim(raw_key));
    const std::string value = trim(raw_value);
    if (key == "name") {
        c.name = value;
    } else if (key == "example") {
        if (lower(value) == "custom")
            c.example = 0;
        else
            c.example = static_cast<int>(parse_integer(value));
    } else if (key == "potential") {
        c.potential = lower(value);
        c.example = 0;
    } else if (key == "potential_file") {
        c.potential_file = value;
        c.example = 0;
    } else if (key == "dim") {
        c.dim = static_cast<int>(parse_integer(value));
    } else if (key == "eps") {
        c.eps = parse_number(value);
    } else if (key == "eps1") {
        c.eps1 = parse_number(value);
    } else if (key == "eps2") {
        c.eps2 = parse_number(value);
    } else if (key == "value") {
        c.value = parse_number(value);
    } else if (key == "ratios" || key == "h_over_eps") {
        c.ratios = parse_number_list(value);
    } else if (key == "h") {
        c.h = lower(value) == "auto" ? 0.0 : parse_number(value);
    } else if (key == "l_star") {
        const std::string v = lower(value);
        c.global_basis = v == "global";
        c.scaled_l_star = v == "scaled";
        if (v == "auto" || v == "global" || v == "scaled")
            c.l_star.reset();
        else
            c.l_star = static_cast<int>(parse_integer(value));
    } else if (key == "t") {
        c.T = parse_number(value);
    } else if (key == "k_ref") {
        c.k_ref = parse_number(value);
    } else if (key == "scheme") {
        try {
            c.scheme = parse_time_scheme(lower(value));
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "output_dir") {
        c.output_dir = value;
    } else if (key == "seed") {
        c.seed = static_cast<std::uint64_t>(parse_integer(value));
    } else if (key == "threads") {
        c.threads = static_cast<unsigned>(parse_integer(value));
    } else if (key == "initial") {
        const std::string v = lower(value);
        if (v == "gaussian")
            c.initial = InitialData::gaussian;
        else if (v == "plane_wave")
            c.initial = InitialData::plane_wave;
        else if (v == "zero")
            c.initial = InitialData::zero;
        else
            throw ConfigError("unknown initial data '" + value + "'");
    } else if (key == "wave_number") {
        c.wave_number = parse_number(value);
    } else if (key == "decay_eps") {
        c.decay_eps = parse_number_list(value);
    } else if (key == "decay_ratio") {
        c.decay_ratio = parse_number(value);
    } else if (key == "dense_limit") {
        c.dense_limit = parse_integer(value);
    } else if (key == "samples") {
        c.samples = static_cast<int>(parse_integer(value));
    } else if (key == "global_basis") {
        c.global_basis = parse_bool(value);
    } else {
        throw ConfigError("unknown key '" + raw_key + "'");
    }
}

std::vector<ExperimentConfig> parse_config(std::istream& in, const std::string& source)
{
    ExperimentConfig defaults;
    std::vector<ExperimentConfig> runs;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto where = [&] { return source + ":" + std::to_string(number) + ": "; };
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where() + "unterminated section header");
            runs.push_back(defaults);
            runs.back().name = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where() + "expected key = value");
        try {
            apply_setting(runs.empty() ? defaults : runs.back(), line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where() + e.what());
        }
    }
    if (runs.empty())
        runs.push_back(defaults);
    for (const auto& run : runs)
        validate(run);
    return runs;
}

std::vector<ExperimentConfig> load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

void validate(const ExperimentConfig& c)
{
    auto fail = [&](const std::string& what) { throw ConfigError("[" + c.name + "] " + what); };
    if (c.example < 0 || c.example > 5)
        fail("example must be 1..5 or custom");
    if (c.example == 0 && c.potential.empty() && c.potential_file.empty())
        fail("a custom example needs 'potential' or 'potential_file'");
    if (c.dim != 1 && c.dim != 2)
        fail("dim must be 1 or 2");
    if (!(c.eps > 0.0))
        fail("eps must be positive");
    if (c.ratios.empty())
        fail("ratios must not be empty");
    for (double r : c.ratios)
        if (!(r > 0.0))
            fail("ratios must be positive");
    if (c.h < 0.0)
        fail("h must be positive or auto");
    if (c.l_star && *c.l_star < 1)
        fail("l_star must be at least 1");
    if (!(c.T > 0.0))
        fail("T must be positive");
    if (!(c.k_ref > 0.0))
        fail("k_ref must be positive");
    const double steps = c.T / c.k_ref;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
        fail("T must be an integer multiple of k_ref");
    if (c.samples < 2)
        fail("samples must be at least 2");
    if (!(c.decay_ratio > 0.0))
        fail("decay_ratio must be positive");
    for (double e : c.decay_eps)
        if (!(e > 0.0))
            fail("decay_eps must be positive");
    if (c.dense_limit < 0)
        fail("dense_limit must be nonnegative");
}

std::string echo(const ExperimentConfig& c)
{
    std::ostringstream out;
    out << std::setprecision(17);
    out << "[" << c.name << "]\n";
    if (c.example == 0) {
        out << "example = custom\n";
        if (!c.potential.empty())
            out << "potential = " << c.potential << "\n";
        if (!c.potential_file.empty())
            out << "potential_file = " << c.potential_file << "\n";
        out << "dim = " << c.dim << "\n";
        out << "eps1 = " << fraction(c.eps1) << "\n";
        out << "eps2 = " << fraction(c.eps2) << "\n";
        out << "value = " << c.value << "\n";
    } else {
        out << "example = " << c.example << "\n";
    }
    out << "eps = " << fraction(c.eps) << "\n";
    out << "ratios = " << join(c.ratios) << "\n";
    out << "h = " << (c.h > 0.0 ? fraction(c.h) : "auto") << "\n";
    out << "l_star = " << (c.global_basis    ? "global"
                              : c.l_star        ? std::to_string(*c.l_star)
                              : c.scaled_l_star ? "scaled"
                                                : "auto") << "\n";
    out << "T = " << c.T << "\n";
    out << "k_ref = " << c.k_ref << "\n";
    out << "scheme = " << to_string(c.scheme) << "\n";
    out << "output_dir = " << c.output_dir << "\n";
    out << "seed = " << c.seed << "\n";
    out << "threads = " << c.threads << "\n";
    out << "initial = "
        << (c.initial == InitialData::gaussian ? "gaussian" : c.initial == InitialData::plane_wave ? "plane_wave" : "zero")
        << "\n";
    out << "wave_number = " << c.wave_number << "\n";
    if (!c.decay_eps.empty())
        out << "decay_eps = " << join(c.decay_eps) << "\n";
    out << "decay_ratio = " << fraction(c.decay_ratio) << "\n";
    out << "dense_limit = " << c.dense_limit << "\n";
    out << "samples = " << c.samples << "\n";
    return out.str();
}

} // namespace msfem
