#include "switchbox/value_field.hpp"

#include "switchbox/error.hpp"
#include "switchbox/hash.hpp"
#include "util.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace switchbox {

static_assert(std::endian::native == std::endian::little, "binary cache assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'W', 'B', 'X', 'V', 'F', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
void write_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error("truncated value field cache");
    return v;
}

double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error("truncated value field cache");
    return v;
}

// Index of the cell [i, i+1] containing x along one axis and the weight of i+1.
std::pair<std::size_t, double> locate(const Grid& g, std::size_t dim, double x) {
    const double h = g.dx(dim);
    const double pos = std::clamp((x - g.bounds.lo[dim]) / h, 0.0, static_cast<double>(g.n_space[dim] - 1));
    const auto i = std::min(static_cast<std::size_t>(pos), g.n_space[dim] - 2);
    return {i, pos - static_cast<double>(i)};
}

}  // namespace

ValueField::ValueField(Grid grid, std::size_t modes, std::uint64_t problem_hash)
    : grid_(std::move(grid)), modes_(modes), problem_hash_(problem_hash) {
    values_.assign(modes_ * (grid_.n_time + 1) * grid_.node_count(), 0.0);
}

double ValueField::interpolate(std::size_t mode, double t, std::span<const double> x) const {
    const double pos = std::clamp(t / grid_.dt(), 0.0, static_cast<double>(grid_.n_time));
    const auto level = std::min(static_cast<std::size_t>(pos), grid_.n_time - 1);
    const double wt = pos - static_cast<double>(level);

    auto spatial = [&](std::size_t lv) {
        if (grid_.dimension() == 1) {
            const auto [i, w] = locate(grid_, 0, x[0]);
            return (1.0 - w) * at(mode, lv, i) + w * at(mode, lv, i + 1);
        }
        const auto [i, wx] = locate(grid_, 0, x[0]);
        const auto [j, wy] = locate(grid_, 1, x[1]);
        const double v00 = at(mode, lv, grid_.node(i, j));
        const double v10 = at(mode, lv, grid_.node(i + 1, j));
        const double v01 = at(mode, lv, grid_.node(i, j + 1));
        const double v11 = at(mode, lv, grid_.node(i + 1, j + 1));
        return (1.0 - wy) * ((1.0 - wx) * v00 + wx * v10) + wy * ((1.0 - wx) * v01 + wx * v11);
    };
    if (wt == 0.0) return spatial(level);
    return (1.0 - wt) * spatial(level) + wt * spatial(level + 1);
}

std::uint64_t ValueField::fingerprint() const {
    Fnv1a h;
    h.update(problem_hash_);
    h.update(std::span<const double>(values_));
    return h.digest();
}

void ValueField::write_csv(const std::filesystem::path& file, std::string_view preamble) const {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << preamble;
    const std::size_t k = grid_.dimension();
    out << "mode,time_index,space_index" << (k == 2 ? ",space_index_2" : "") << ",t,x1" << (k == 2 ? ",x2" : "") << ",v\n";
    std::vector<double> x(k);
    for (std::size_t m = 0; m < modes_; ++m) {
        for (std::size_t level = 0; level <= grid_.n_time; ++level) {
            const std::string t = detail::format_double(grid_.time(level));
            for (std::size_t node = 0; node < grid_.node_count(); ++node) {
                const auto idx = grid_.multi_index(node);
                grid_.position(node, x);
                out << m + 1 << ',' << level << ',' << idx[0];
                if (k == 2) out << ',' << idx[1];
                out << ',' << t;
                for (double xi : x) out << ',' << detail::format_double(xi);
                out << ',' << detail::format_double(at(m, level, node)) << '\n';
            }
        }
    }
}

void ValueField::save_binary(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    out.write(kMagic, sizeof kMagic);
    const std::size_t k = grid_.dimension();
    write_u64(out, modes_);
    write_u64(out, k);
    write_u64(out, grid_.n_space[0]);
    write_u64(out, k == 2 ? grid_.n_space[1] : 0);
    write_u64(out, grid_.n_time);
    write_u64(out, problem_hash_);
    write_u64(out, scheme == FdScheme::explicit_euler ? 0 : 1);
    write_u64(out, max_projection_passes);
    write_u64(out, max_policy_iterations);
    write_f64(out, grid_.horizon);
    for (std::size_t d = 0; d < k; ++d) {
        write_f64(out, grid_.bounds.lo[d]);
        write_f64(out, grid_.bounds.hi[d]);
    }
    write_u64(out, values_.size());
    out.write(reinterpret_cast<const char*>(values_.data()), static_cast<std::streamsize>(values_.size() * sizeof(double)));
    if (!out) throw Error("failed writing " + file.string());
}

ValueField ValueField::load_binary(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error(file.string() + " is not a value field cache");
    Grid g;
    const std::size_t modes = read_u64(in);
    const std::size_t k = read_u64(in);
    if (k != 1 && k != 2) throw Error("corrupt value field cache");
    g.n_space.push_back(read_u64(in));
    const std::size_t ny = read_u64(in);
    if (k == 2) g.n_space.push_back(ny);
    g.n_time = read_u64(in);
    const std::uint64_t hash = read_u64(in);
    const std::uint64_t scheme = read_u64(in);
    const std::uint64_t passes = read_u64(in);
    const std::uint64_t policy_iterations = read_u64(in);
    g.horizon = read_f64(in);
    for (std::size_t d = 0; d < k; ++d) {
        g.bounds.lo.push_back(read_f64(in));
        g.bounds.hi.push_back(read_f64(in));
    }
    ValueField v(std::move(g), modes, hash);
    v.scheme = scheme == 0 ? FdScheme::explicit_euler : FdScheme::implicit_euler;
    v.max_projection_passes = passes;
    v.max_policy_iterations = policy_iterations;
    if (read_u64(in) != v.values_.size()) throw Error("corrupt value field cache");
    in.read(reinterpret_cast<char*>(v.values_.data()), static_cast<std::streamsize>(v.values_.size() * sizeof(double)));
    if (!in) throw Error("truncated value field cache");
    return v;
}

std::uint64_t fd_cache_key(const SwitchingProblem& p, const Grid& g, FdScheme scheme) {
    Fnv1a h;
    h.update(canonical_text(p));
    for (std::size_t n : g.n_space) h.update(static_cast<std::uint64_t>(n));
    h.update(static_cast<std::uint64_t>(g.n_time));
    h.update(std::span<const double>(g.bounds.lo));
    h.update(std::span<const double>(g.bounds.hi));
    h.update(to_string(scheme));
    return h.digest();
}

}  // namespace switchbox
