#pragma once

// Monte Carlo oracle: samples single-particle paths from the absorbing chain
// and estimates transit time, jump count, occupation times, exit distribution,
// and path entropy (via the exact log-density) with standard errors.
//
// Reproducibility contract: every path owns an independent generator derived
// from (seed, path index), and accumulation happens in fixed-size blocks that
// are reduced in index order.  Results are therefore bit-identical for any
// worker count.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "pathent/chain.hpp"
#include "pathent/comsys.hpp"

namespace pathent {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

/// SplitMix64 stream; the constructor scrambles (seed, path index) into a
/// well-separated stream origin.
class PathRng {
  public:
    PathRng(std::uint64_t seed, std::uint64_t path_index)
        : state_(detail::mix64(seed + 0x9E3779B97F4A7C15ull) ^
                 detail::mix64(path_index * 0xBF58476D1CE4E5B9ull + 0x94D049BB133111EBull)) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        return detail::mix64(state_);
    }

    double uniform01() { return double(next() >> 11) * 0x1.0p-53; } // [0, 1)

    double uniform_open01() { return (double(next() >> 11) + 0.5) * 0x1.0p-53; } // (0, 1)

    /// Inverse-CDF exponential draw, strictly positive.
    double exponential(double rate) { return -std::log1p(-uniform_open01()) / rate; }

  private:
    std::uint64_t state_;
};

struct PathSample {
    struct Visit {
        int compartment; // 0-based
        double sojourn;  // > 0
    };
    std::vector<Visit> visits; // nonempty, in order of visiting
    int exit_from = -1;        // equals visits.back().compartment
    double transit_time = 0.0; // sum of sojourns as accumulated
};

namespace detail {

// Per-column categorical tables: (cumulative probability, next state) with the
// final cumulative forced to 1 so a uniform draw in [0,1) always lands on a
// positive-rate transition.  State d encodes the exit.
struct SamplerTables {
    int d = 0;
    std::vector<std::pair<double, int>> entry; // from beta
    std::vector<std::vector<std::pair<double, int>>> columns;
    Eigen::VectorXd lambda;

    static std::vector<std::pair<double, int>> cumulative(const Eigen::VectorXd& weights,
                                                          const std::vector<int>& states) {
        std::vector<std::pair<double, int>> cum;
        const double total = weights.sum();
        double acc = 0.0;
        for (Eigen::Index k = 0; k < weights.size(); ++k) {
            if (weights[k] <= 0.0) continue;
            acc += weights[k] / total;
            cum.emplace_back(acc, states[size_t(k)]);
        }
        if (!cum.empty()) cum.back().first = 1.0;
        return cum;
    }

    explicit SamplerTables(const CompartmentalSystem& sys) {
        d = int(sys.dimension());
        lambda = -sys.B.diagonal();
        const Vector beta = entry_distribution(sys);
        const Vector z = output_rates(sys.B);

        std::vector<int> pool_states(size_t(d));
        for (int i = 0; i < d; ++i) pool_states[size_t(i)] = i;
        entry = cumulative(beta, pool_states);

        columns.resize(size_t(d));
        for (int j = 0; j < d; ++j) {
            Eigen::VectorXd w(d + 1);
            std::vector<int> states(size_t(d) + 1);
            for (int i = 0; i < d; ++i) {
                w[i] = (i == j) ? 0.0 : sys.B(i, j);
                states[size_t(i)] = i;
            }
            w[d] = z[j];
            states[size_t(d)] = d;
            columns[size_t(j)] = cumulative(w, states);
        }
    }

    static int draw(const std::vector<std::pair<double, int>>& cum, double uniform) {
        for (const auto& [threshold, state] : cum) {
            if (uniform < threshold) return state;
        }
        return cum.back().second;
    }
};

} // namespace detail

inline PathSample sample_path(const detail::SamplerTables& tables, PathRng& rng,
                              std::int64_t max_jumps = 10'000'000) {
    PathSample path;
    int state = detail::SamplerTables::draw(tables.entry, rng.uniform01());
    while (true) {
        const double rate = tables.lambda[state];
        if (!(rate > 0.0)) {
            throw Error(ErrorCode::InvalidArgument,
                        "pool " + std::to_string(state + 1) + " has zero total exit rate");
        }
        const double sojourn = rng.exponential(rate);
        path.visits.push_back({state, sojourn});
        path.transit_time += sojourn;
        const int next = detail::SamplerTables::draw(tables.columns[size_t(state)], rng.uniform01());
        if (next == tables.d) {
            path.exit_from = state;
            return path;
        }
        state = next;
        if (std::int64_t(path.visits.size()) + 1 > max_jumps) {
            throw Error(ErrorCode::MaxJumpsExceeded,
                        "path exceeded " + std::to_string(max_jumps) +
                            " jumps; system may be numerically closed");
        }
    }
}

inline PathSample sample_path(const CompartmentalSystem& sys, PathRng& rng,
                              std::int64_t max_jumps = 10'000'000) {
    detail::SamplerTables tables(sys);
    return sample_path(tables, rng, max_jumps);
}

/// Exact log-density of a path: log beta_{y_1} + sum_{i,j} N_ij log(rate i<-j)
/// - sum_j lambda_j R_j, where N_ij counts one-step transitions and R_j is the
/// occupation time of pool j.  Returns -inf for a zero-probability path.
inline double log_path_density(const CompartmentalSystem& sys, const PathSample& path) {
    const auto d = sys.dimension();
    if (path.visits.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
    for (const auto& visit : path.visits) {
        if (visit.compartment < 0 || visit.compartment >= d) {
            throw Error(ErrorCode::DimensionMismatch, "path visits a pool outside the system");
        }
    }

    constexpr double minus_inf = -std::numeric_limits<double>::infinity();
    const Vector beta = entry_distribution(sys);
    const Vector z = output_rates(sys.B);

    Matrix transition_counts = Matrix::Zero(d + 1, d);
    Vector occupation = Vector::Zero(d);
    for (size_t k = 0; k < path.visits.size(); ++k) {
        const int from = path.visits[k].compartment;
        occupation[from] += path.visits[k].sojourn;
        const int to = (k + 1 < path.visits.size()) ? path.visits[k + 1].compartment : int(d);
        transition_counts(to, from) += 1.0;
    }

    if (beta[path.visits.front().compartment] <= 0.0) return minus_inf;
    double log_density = std::log(beta[path.visits.front().compartment]);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d + 1; ++i) {
            const double count = transition_counts(i, j);
            if (count == 0.0 || i == j) continue;
            const double rate = (i < d) ? sys.B(i, j) : z[j];
            if (rate <= 0.0) return minus_inf;
            log_density += count * std::log(rate);
        }
        log_density -= (-sys.B(j, j)) * occupation[j];
    }
    return log_density;
}

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    bool operator==(const Estimate&) const = default;
};

struct MonteCarloEstimates {
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    Estimate mean_transit;
    Estimate mean_jumps;
    Estimate entropy; // -(1/n) sum log f(path)
    std::vector<Estimate> mean_occupation;
    std::vector<double> exit_distribution;
    bool operator==(const MonteCarloEstimates&) const = default;
};

struct EstimateConfig {
    std::int64_t n_paths = 100'000;
    std::uint64_t seed = 0;
    int workers = 1;
    std::int64_t max_jumps = 10'000'000;
};

/// Callback form used by the CLI to stream per-path rows into a CSV.  The
/// callback, when set, is invoked from a single thread in path order.
using PathObserver = std::function<void(std::int64_t index, const PathSample&, double log_density)>;

namespace detail {

struct BlockAccum {
    std::int64_t n = 0;
    double sum_t = 0, sum_t2 = 0;
    double sum_n = 0, sum_n2 = 0;
    double sum_l = 0, sum_l2 = 0;
    Eigen::ArrayXd sum_o, sum_o2, exit_count;

    explicit BlockAccum(int d)
        : sum_o(Eigen::ArrayXd::Zero(d)), sum_o2(Eigen::ArrayXd::Zero(d)),
          exit_count(Eigen::ArrayXd::Zero(d)) {}
};

inline Estimate finish(double sum, double sum_sq, std::int64_t n) {
    Estimate e;
    e.value = sum / double(n);
    if (n > 1) {
        const double var = std::max(0.0, (sum_sq - sum * sum / double(n)) / double(n - 1));
        e.std_error = std::sqrt(var / double(n));
    }
    return e;
}

} // namespace detail

inline MonteCarloEstimates estimate(const CompartmentalSystem& sys, const EstimateConfig& config,
                                    const PathObserver& observer = {}) {
    if (config.n_paths < 1) throw Error(ErrorCode::InvalidArgument, "n_paths must be >= 1");
    const detail::SamplerTables tables(sys);
    const int d = tables.d;

    constexpr std::int64_t kBlockSize = 4096;
    const std::int64_t n_blocks = (config.n_paths + kBlockSize - 1) / kBlockSize;
    std::vector<detail::BlockAccum> blocks(size_t(n_blocks), detail::BlockAccum(d));

    Eigen::ArrayXd scratch_occupation(d);
    auto run_block = [&](std::int64_t block, Eigen::ArrayXd& occupation) {
        detail::BlockAccum& acc = blocks[size_t(block)];
        const std::int64_t begin = block * kBlockSize;
        const std::int64_t end = std::min(config.n_paths, begin + kBlockSize);
        for (std::int64_t index = begin; index < end; ++index) {
            PathRng rng(config.seed, std::uint64_t(index));
            const PathSample path = sample_path(tables, rng, config.max_jumps);
            const double log_density = log_path_density(sys, path);
            const double surprisal = -log_density;
            const double jumps = double(path.visits.size()) + 1.0;

            occupation.setZero();
            for (const auto& visit : path.visits) occupation[visit.compartment] += visit.sojourn;

            acc.n += 1;
            acc.sum_t += path.transit_time;
            acc.sum_t2 += path.transit_time * path.transit_time;
            acc.sum_n += jumps;
            acc.sum_n2 += jumps * jumps;
            acc.sum_l += surprisal;
            acc.sum_l2 += surprisal * surprisal;
            acc.sum_o += occupation;
            acc.sum_o2 += occupation.square();
            acc.exit_count[path.exit_from] += 1.0;
            if (observer) observer(index, path, log_density);
        }
    };

    const int workers = std::max(1, config.workers);
    if (workers == 1 || observer) {
        for (std::int64_t block = 0; block < n_blocks; ++block) run_block(block, scratch_occupation);
    } else {
        std::atomic<std::int64_t> next_block{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker_loop = [&] {
            Eigen::ArrayXd occupation(d);
            while (true) {
                const std::int64_t block = next_block.fetch_add(1);
                if (block >= n_blocks) return;
                try {
                    run_block(block, occupation);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(size_t(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_loop);
        for (auto& thread : pool) thread.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    detail::BlockAccum total(d);
    for (const auto& block : blocks) { // reduced in block-index order
        total.n += block.n;
        total.sum_t += block.sum_t;
        total.sum_t2 += block.sum_t2;
        total.sum_n += block.sum_n;
        total.sum_n2 += block.sum_n2;
        total.sum_l += block.sum_l;
        total.sum_l2 += block.sum_l2;
        total.sum_o += block.sum_o;
        total.sum_o2 += block.sum_o2;
        total.exit_count += block.exit_count;
    }

    MonteCarloEstimates result;
    result.n_paths = config.n_paths;
    result.seed = config.seed;
    result.mean_transit = detail::finish(total.sum_t, total.sum_t2, total.n);
    result.mean_jumps = detail::finish(total.sum_n, total.sum_n2, total.n);
    result.entropy = detail::finish(total.sum_l, total.sum_l2, total.n);
    result.mean_occupation.resize(size_t(d));
    result.exit_distribution.resize(size_t(d));
    for (int j = 0; j < d; ++j) {
        result.mean_occupation[size_t(j)] = detail::finish(total.sum_o[j], total.sum_o2[j], total.n);
        result.exit_distribution[size_t(j)] = total.exit_count[j] / double(total.n);
    }
    return result;
}

} // namespace pathent
