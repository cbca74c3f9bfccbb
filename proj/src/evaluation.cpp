#include "rummi/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "rummi/rules.hpp"

namespace rummi {

namespace {

using Rng = std::mt19937_64;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t base, Parts... parts) {
  std::uint64_t h = splitmix(base);
  ((h = splitmix(h ^ static_cast<std::uint64_t>(parts))), ...);
  return h;
}

Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <int K>
Eigen::Matrix<double, 1, K> dirichlet(Rng& rng, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Eigen::Matrix<double, 1, K> v;
  for (int i = 0; i < K; ++i) v(i) = gamma(rng);
  const double sum = v.sum();
  if (!(sum > 0.0)) return Eigen::Matrix<double, 1, K>::Constant(1.0 / K);
  return v / sum;
}

double joker_share(Rng& rng, double alpha) {
  const double mine = std::gamma_distribution<double>(alpha, 1.0)(rng);
  const double rest = std::gamma_distribution<double>(alpha * kRegularCount, 1.0)(rng);
  const double sum = mine + rest;
  return sum > 0.0 ? mine / sum : 1.0 / kIdentityCount;
}

IdentityList sample_group(Rng& rng, int size) {
  const Number number(uniform_int(rng, 1, kNumberCount));
  auto colors = kAllColors;
  std::shuffle(colors.begin(), colors.end(), rng);
  IdentityList out;
  for (int i = 0; i < size; ++i) out.push_back(TileIdentity::regular(number, colors[i]));
  return out;
}

IdentityList sample_run(Rng& rng, int size) {
  const Color color = kAllColors[uniform_int(rng, 0, kColorCount - 1)];
  const int start = uniform_int(rng, 1, kNumberCount - size + 1);
  IdentityList out;
  for (int i = 0; i < size; ++i) out.push_back(TileIdentity::regular(Number(start + i), color));
  if (uniform_int(rng, 0, 1) == 1) std::reverse(out.begin(), out.end());
  return out;
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (const double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (const double x : xs) acc += x;
  return xs.empty() ? 0.0 : acc / static_cast<double>(xs.size());
}

struct TileRef {
  std::size_t set;
  Eigen::Index row;
};

std::map<std::string, TileRef> index_tiles(const GroundTruthState& truth) {
  std::map<std::string, TileRef> out;
  for (std::size_t s = 0; s < truth.set_members.size(); ++s) {
    for (std::size_t r = 0; r < truth.set_members[s].size(); ++r) {
      out.emplace(truth.set_members[s][r], TileRef{s, static_cast<Eigen::Index>(r)});
    }
  }
  return out;
}

}  // namespace

void validate_params(const GenParams& p) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::UnsatisfiableParams, why); };
  if (p.min_sets < 1 || p.max_sets < p.min_sets) fail("set count range must satisfy 1 <= min <= max");
  if (p.min_set_size < kMinSetSize || p.max_set_size > kMaxSetSize || p.min_set_size > p.max_set_size) {
    fail("set size range must lie within [3, 13]");
  }
  if (p.max_jokers < 0 || p.max_jokers > kMaxJokers) fail("a board holds at most 2 jokers");
  if (!(p.joker_probability >= 0.0 && p.joker_probability <= 1.0)) fail("joker probability must be in [0, 1]");
  if (!(p.tile_width > 0.0 && p.tile_height > 0.0 && p.tile_pitch > 0.0)) fail("tile geometry must be positive");
  if (!(p.jitter >= 0.0 && p.angle_jitter_deg >= 0.0 && p.separation >= 0.0)) fail("noise and separation must be >= 0");
}

GroundTruthState generate_state(const GenParams& params, std::uint64_t seed) {
  validate_params(params);
  Rng rng = make_rng(seed);
  GroundTruthState state;
  state.seed = seed;

  const int group_lo = std::max(params.min_set_size, 3);
  const int group_hi = std::min(params.max_set_size, 4);
  const bool groups_possible = group_lo <= group_hi;

  const int n_sets = uniform_int(rng, params.min_sets, params.max_sets);
  int jokers_left = params.max_jokers;
  for (int s = 0; s < n_sets; ++s) {
    const bool group = groups_possible && uniform_int(rng, 0, 1) == 0;
    IdentityList set = group ? sample_group(rng, uniform_int(rng, group_lo, group_hi))
                             : sample_run(rng, uniform_int(rng, params.min_set_size, params.max_set_size));
    std::bernoulli_distribution joker_coin(params.joker_probability);
    for (auto& id : set) {
      if (jokers_left > 0 && joker_coin(rng)) {
        id = TileIdentity::joker();
        --jokers_left;
      }
    }
    state.sets.push_back(std::move(set));
  }

  std::size_t total = 0;
  for (const auto& set : state.sets) total += set.size();
  std::vector<int> labels(total);
  std::iota(labels.begin(), labels.end(), 0);
  std::shuffle(labels.begin(), labels.end(), rng);

  const double w = params.tile_width;
  const double max_len = (params.max_set_size - 1) * params.tile_pitch * w + w;
  const double radius = 0.5 * std::hypot(max_len, params.tile_height) + params.jitter * w;
  const double cell = 2.0 * radius + params.separation * w;
  const int columns = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_sets))));
  const Eigen::Vector2d origin(std::uniform_real_distribution<double>(0.0, cell)(rng),
                               std::uniform_real_distribution<double>(0.0, cell)(rng));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double angle_jitter = params.angle_jitter_deg * std::numbers::pi / 180.0;

  std::size_t next_label = 0;
  for (int s = 0; s < n_sets; ++s) {
    const auto& set = state.sets[s];
    const Eigen::Vector2d center = origin + cell * Eigen::Vector2d(s % columns, s / columns);
    const double theta = std::numbers::pi * unit(rng);
    const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
    const double half = 0.5 * static_cast<double>(set.size() - 1);

    std::vector<std::string> members;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const double r = params.jitter * w * std::sqrt(unit(rng));
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      DetectionBox box;
      char label[16];
      std::snprintf(label, sizeof label, "t%03d", labels[next_label++]);
      box.id = label;
      box.center = center + (static_cast<double>(i) - half) * params.tile_pitch * w * dir +
                   r * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      box.width = w;
      box.height = params.tile_height;
      box.angle = normalize_axis_angle(theta + angle_jitter * (2.0 * unit(rng) - 1.0));
      members.push_back(box.id);
      state.layout.push_back(std::move(box));
    }
    state.set_members.push_back(std::move(members));
  }
  return state;
}

std::vector<ConfidenceMatrixd> corrupt(const GroundTruthState& truth, const NoiseParams& noise) {
  if (!(noise.quality >= 0.0 && noise.quality <= 1.0) || !(noise.concentration > 0.0)) {
    throw Error(ErrorCode::UnsatisfiableParams, "quality must be in [0, 1] and concentration > 0");
  }
  Rng rng = make_rng(derive_seed(noise.seed, truth.seed));
  const double q = noise.quality;
  std::vector<ConfidenceMatrixd> out;
  out.reserve(truth.sets.size());
  for (const auto& set : truth.sets) {
    auto m = ConfidenceMatrixd::Zero(static_cast<Eigen::Index>(set.size()));
    for (Eigen::Index t = 0; t < m.tile_count(); ++t) {
      const auto id = set[static_cast<std::size_t>(t)];
      Eigen::Matrix<double, 1, kColorCount> color_truth;
      Eigen::Matrix<double, 1, kNumberCount> number_truth;
      if (id.is_joker()) {
        color_truth.setConstant(1.0 / kColorCount);
        number_truth.setConstant(1.0 / kNumberCount);
      } else {
        color_truth.setZero();
        number_truth.setZero();
        color_truth(rank(id.color())) = 1.0;
        number_truth(id.number().value() - 1) = 1.0;
      }
      m.color.row(t) = q * color_truth + (1.0 - q) * dirichlet<kColorCount>(rng, noise.concentration);
      m.number.row(t) = q * number_truth + (1.0 - q) * dirichlet<kNumberCount>(rng, noise.concentration);
      m.joker(t) = q * (id.is_joker() ? 1.0 : 0.0) + (1.0 - q) * joker_share(rng, noise.concentration);
    }
    out.push_back(std::move(m));
  }
  return out;
}

Metrics& Metrics::operator+=(const Metrics& o) {
  tiles_correct += o.tiles_correct;
  tiles_total += o.tiles_total;
  sets_correct += o.sets_correct;
  sets_total += o.sets_total;
  images_correct += o.images_correct;
  images_total += o.images_total;
  return *this;
}

Metrics evaluate(const GroundTruthState& truth, const Predictions& predictions, std::span<const Cluster> clusters) {
  const auto tiles = index_tiles(truth);
  if (tiles.size() != predictions.size() ||
      !std::equal(tiles.begin(), tiles.end(), predictions.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw Error(ErrorCode::IdMismatch, "predictions do not cover exactly the ground-truth tiles");
  }

  std::set<std::vector<std::string>> recovered;
  for (const auto& c : clusters) {
    auto members = c.members;
    std::sort(members.begin(), members.end());
    recovered.insert(std::move(members));
  }

  Metrics m;
  m.images_total = 1;
  m.sets_total = truth.sets.size();
  for (std::size_t s = 0; s < truth.sets.size(); ++s) {
    bool all_correct = true;
    for (std::size_t r = 0; r < truth.sets[s].size(); ++r) {
      const bool ok = predictions.at(truth.set_members[s][r]) == truth.sets[s][r];
      m.tiles_correct += ok;
      all_correct = all_correct && ok;
    }
    m.tiles_total += truth.sets[s].size();
    auto members = truth.set_members[s];
    std::sort(members.begin(), members.end());
    m.sets_correct += all_correct && recovered.contains(members);
  }
  m.images_correct = m.tiles_correct == m.tiles_total;
  return m;
}

Predictions predict_raw(const GroundTruthState& truth, std::span<const ConfidenceMatrixd> confidences) {
  Predictions out;
  for (std::size_t s = 0; s < truth.sets.size(); ++s) {
    const auto labels = raw_argmax(confidences[s]);
    for (std::size_t r = 0; r < labels.size(); ++r) out.emplace(truth.set_members[s][r], labels[r]);
  }
  return out;
}

Predictions predict_corrected(const GroundTruthState& truth, std::span<const ConfidenceMatrixd> confidences,
                              std::span<const Cluster> clusters, const CorrectorConfig& cfg) {
  const auto tiles = index_tiles(truth);
  Predictions out = predict_raw(truth, confidences);
  for (const auto& cluster : clusters) {
    const auto k = static_cast<Eigen::Index>(cluster.members.size());
    if (k < kMinSetSize || k > kMaxSetSize) continue;
    auto m = ConfidenceMatrixd::Zero(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto& ref = tiles.at(cluster.members[static_cast<std::size_t>(i)]);
      const auto& src = confidences[ref.set];
      m.color.row(i) = src.color.row(ref.row);
      m.number.row(i) = src.number.row(ref.row);
      m.joker(i) = src.joker(ref.row);
    }
    const auto result = correct_set(m, cfg);
    for (Eigen::Index i = 0; i < k; ++i) {
      out.at(cluster.members[static_cast<std::size_t>(i)]) = result.assignment.identities[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

std::string_view to_string(Pipeline p) { return p == Pipeline::Raw ? "raw" : "corrected"; }

unsigned default_thread_count() {
  if (const char* env = std::getenv("RUMMI_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

LatencyStats measure_latency(int tiles, int samples, std::uint64_t seed) {
  if (tiles < kMinSetSize || tiles > kMaxSetSize || samples < 1) {
    throw Error(ErrorCode::UnsatisfiableParams, "latency needs 3..13 tiles and at least one sample");
  }
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> ms;
  ms.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    auto m = ConfidenceMatrixd::Zero(tiles);
    m.color = m.color.unaryExpr([&](double) { return unit(rng); });
    m.number = m.number.unaryExpr([&](double) { return unit(rng); });
    m.joker = m.joker.unaryExpr([&](double) { return unit(rng); });
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = correct_set(m);
    const auto t1 = std::chrono::steady_clock::now();
    if (result.assignment.identities.empty()) throw Error(ErrorCode::Infeasible, "empty assignment");
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  auto quantile = [&](double p) {
    const auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(ms.size()))) - 1;
    return ms[std::min(idx, ms.size() - 1)];
  };
  return {tiles, samples, quantile(0.5), quantile(0.99), ms.back()};
}

SweepReport sweep(const SweepConfig& cfg) {
  if (cfg.n_seeds < 1 || cfg.images_per_seed < 1 || cfg.qualities.empty()) {
    throw Error(ErrorCode::UnsatisfiableParams, "sweep needs at least one level, seed and image");
  }
  validate_params(cfg.gen);
  for (const double q : cfg.qualities) {
    if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::UnsatisfiableParams, "quality levels must be in [0, 1]");
  }
  if (!(cfg.concentration > 0.0)) throw Error(ErrorCode::UnsatisfiableParams, "concentration must be > 0");

  const std::size_t levels = cfg.qualities.size();
  const std::size_t seeds = static_cast<std::size_t>(cfg.n_seeds);
  std::vector<std::pair<Metrics, Metrics>> results(levels * seeds);

  auto run_cell = [&](std::size_t cell) {
    const std::size_t level = cell / seeds;
    const std::size_t seed = cell % seeds;
    Metrics raw, corrected;
    for (int image = 0; image < cfg.images_per_seed; ++image) {
      // Boards depend on (seed, image) only, so every quality level sees the same boards.
      const auto state = generate_state(cfg.gen, derive_seed(cfg.master_seed, 0, seed, image));
      const auto clusters = cluster_tiles(state.layout, cfg.cluster);
      const NoiseParams noise{cfg.qualities[level], cfg.concentration,
                              derive_seed(cfg.master_seed, 1, level, seed, image)};
      const auto conf = corrupt(state, noise);
      raw += evaluate(state, predict_raw(state, conf), clusters);
      corrected += evaluate(state, predict_corrected(state, conf, clusters, cfg.corrector), clusters);
    }
    results[cell] = {raw, corrected};
  };

  const unsigned threads = std::min<std::size_t>(cfg.threads ? cfg.threads : default_thread_count(), results.size());
  if (threads <= 1) {
    for (std::size_t c = 0; c < results.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          try {
            for (std::size_t c = next++; c < results.size(); c = next++) run_cell(c);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = results.size();
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  SweepReport report;
  for (std::size_t level = 0; level < levels; ++level) {
    for (const Pipeline p : {Pipeline::Raw, Pipeline::Corrected}) {
      std::vector<double> tile, set, image;
      for (std::size_t seed = 0; seed < seeds; ++seed) {
        const auto& pair = results[level * seeds + seed];
        const Metrics& m = p == Pipeline::Raw ? pair.first : pair.second;
        report.cells.push_back({cfg.qualities[level], static_cast<int>(seed), p, m});
        tile.push_back(m.tile_accuracy());
        set.push_back(m.set_accuracy());
        image.push_back(m.image_accuracy());
      }
      SweepRow row;
      row.quality = cfg.qualities[level];
      row.pipeline = p;
      row.n_seeds = cfg.n_seeds;
      row.tile_mean = mean_of(tile);
      row.tile_std = sample_std(tile, row.tile_mean);
      row.set_mean = mean_of(set);
      row.set_std = sample_std(set, row.set_mean);
      row.image_mean = mean_of(image);
      row.image_std = sample_std(image, row.image_mean);
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace rummi
