#pragma once

#include "switchbox/grid.hpp"
#include "switchbox/problem_io.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <span>
#include <string>
#include <vector>

namespace switchbox {

// m value surfaces on the space-time grid: v[mode][level][node].
class ValueField {
public:
    ValueField() = default;
    ValueField(Grid grid, std::size_t modes, std::uint64_t problem_hash);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t modes() const noexcept { return modes_; }
    std::uint64_t problem_hash() const noexcept { return problem_hash_; }

    double& at(std::size_t mode, std::size_t level, std::size_t node) noexcept {
        return values_[offset(mode, level) + node];
    }
    double at(std::size_t mode, std::size_t level, std::size_t node) const noexcept {
        return values_[offset(mode, level) + node];
    }
    std::span<double> slice(std::size_t mode, std::size_t level) noexcept {
        return {values_.data() + offset(mode, level), grid_.node_count()};
    }
    std::span<const double> slice(std::size_t mode, std::size_t level) const noexcept {
        return {values_.data() + offset(mode, level), grid_.node_count()};
    }

    // Linear in time, (bi)linear in space; x is clamped to the grid box.
    double interpolate(std::size_t mode, double t, std::span<const double> x) const;

    std::uint64_t fingerprint() const;

    // Columns: mode,time_index,space_index[,space_index_2],t,x1[,x2],v (modes one-based).
    void write_csv(const std::filesystem::path& file, std::string_view preamble = {}) const;
    void save_binary(const std::filesystem::path& file) const;
    static ValueField load_binary(const std::filesystem::path& file);

    FdScheme scheme = FdScheme::implicit_euler;
    std::size_t max_projection_passes = 0;
    std::size_t max_policy_iterations = 0;
    std::vector<std::string> warnings;

private:
    Grid grid_;
    std::size_t modes_ = 0;
    std::uint64_t problem_hash_ = 0;
    std::vector<double> values_;

    std::size_t offset(std::size_t mode, std::size_t level) const noexcept {
        return (mode * (grid_.n_time + 1) + level) * grid_.node_count();
    }
};

// Cache key for a solve: hash of (problem, grid, scheme).
std::uint64_t fd_cache_key(const SwitchingProblem& p, const Grid& g, FdScheme scheme);

}  // namespace switchbox
