#pragma once

// Independent reference computations used to check the library. Everything
// here is written for clarity, not speed: direct per-sample sums and full
// enumeration, sharing no code with the optimised paths under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "craft/bitvector.hpp"
#include "craft/hypotheses.hpp"
#include "craft/toy_env.hpp"

namespace oracle {

using craft::BitVector;
using craft::EncoderClass;

struct Pair {
  BitVector first;
  BitVector second;
};

/// Direct log-odds loss of the full predictor (enc_h, enc_next, table of grid values).
inline double odds_loss(const std::vector<Pair>& a, const std::vector<Pair>& b, const EncoderClass& phi_h,
                        const EncoderClass& phi_next, std::size_t i, std::size_t j, const std::vector<double>& table,
                        int cols) {
  double loss = 0.0;
  for (const auto& p : a) {
    const double f = table[static_cast<std::size_t>(phi_h.apply(i, p.first) * cols + phi_next.apply(j, p.second))];
    loss += std::log(std::exp(-f) + 1.0);
  }
  for (const auto& p : b) {
    const double f = table[static_cast<std::size_t>(phi_h.apply(i, p.first) * cols + phi_next.apply(j, p.second))];
    loss += std::log(std::exp(f) + 1.0);
  }
  return loss;
}

/// Minimum of the log-odds loss over every encoder pair and every table in grid^(rows*cols).
inline double brute_odds_erm(const std::vector<Pair>& a, const std::vector<Pair>& b, const EncoderClass& phi_h,
                             const EncoderClass& phi_next, const std::vector<double>& grid) {
  const int rows = phi_h.num_outputs();
  const int cols = phi_next.num_outputs();
  const std::size_t cells = static_cast<std::size_t>(rows * cols);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < phi_h.size(); ++i) {
    for (std::size_t j = 0; j < phi_next.size(); ++j) {
      std::vector<std::size_t> digits(cells, 0);
      while (true) {
        std::vector<double> table(cells);
        for (std::size_t c = 0; c < cells; ++c) table[c] = grid[digits[c]];
        best = std::min(best, odds_loss(a, b, phi_h, phi_next, i, j, table, cols));
        std::size_t c = 0;
        while (c < cells && ++digits[c] == grid.size()) digits[c++] = 0;
        if (c == cells) break;
      }
    }
  }
  return best;
}

/// (1/|P|) sum_P (1 - g) + (1/|N|) sum_N g, minimised by enumeration.
inline std::pair<std::size_t, double> brute_binary(const std::vector<BitVector>& pos, const std::vector<BitVector>& neg,
                                                   const EncoderClass& g) {
  std::pair<std::size_t, double> best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t m = 0; m < g.size(); ++m) {
    double miss = 0.0;
    double false_alarm = 0.0;
    for (const auto& x : pos) miss += 1.0 - g.apply(m, x);
    for (const auto& x : neg) false_alarm += g.apply(m, x);
    const double loss = miss / static_cast<double>(pos.size()) + false_alarm / static_cast<double>(neg.size());
    if (loss < best.second) best = {m, loss};
  }
  return best;
}

/// sum_s mean_{x in D_s} 1[sigma(phi(x)) != s] minimised over members and all
/// bijections sigma of max(outputs, states) labels.
inline double brute_multiclass(const std::vector<std::vector<BitVector>>& per_state, const EncoderClass& phi) {
  const int k = std::max<int>(phi.num_outputs(), static_cast<int>(per_state.size()));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < phi.size(); ++m) {
    std::vector<int> sigma(static_cast<std::size_t>(k));
    std::iota(sigma.begin(), sigma.end(), 0);
    do {
      double loss = 0.0;
      for (std::size_t s = 0; s < per_state.size(); ++s) {
        double wrong = 0.0;
        for (const auto& x : per_state[s]) wrong += sigma[static_cast<std::size_t>(phi.apply(m, x))] != static_cast<int>(s);
        loss += wrong / static_cast<double>(per_state[s].size());
      }
      best = std::min(best, loss);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  }
  return best;
}

/// Plug-in MI between a joint feature value (any hashable key) and the agent,
/// computed from an explicit contingency table.
template <class Key>
double contingency_mi(const std::vector<Key>& values_a, const std::vector<Key>& values_b) {
  std::map<Key, std::pair<double, double>> table;
  for (const auto& v : values_a) table[v].first += 1.0;
  for (const auto& v : values_b) table[v].second += 1.0;
  const double na = static_cast<double>(values_a.size());
  const double nb = static_cast<double>(values_b.size());
  const double n = na + nb;
  double mi = 0.0;
  for (const auto& [key, c] : table) {
    const double pv = (c.first + c.second) / n;
    if (c.first > 0) mi += (c.first / n) * std::log((c.first / n) / (pv * (na / n)));
    if (c.second > 0) mi += (c.second / n) * std::log((c.second / n) / (pv * (nb / n)));
  }
  return mi;
}

/// Best fraction of agreement over all bijections of max(#learned, #true) labels,
/// where padded labels never match.
inline double brute_label_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  int k = 0;
  for (int v : predicted) k = std::max(k, v + 1);
  for (int v : truth) k = std::max(k, v + 1);
  std::vector<int> sigma(static_cast<std::size_t>(k));
  std::iota(sigma.begin(), sigma.end(), 0);
  double best = 0.0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += sigma[static_cast<std::size_t>(predicted[i])] == truth[i];
    best = std::max(best, static_cast<double>(hits) / static_cast<double>(predicted.size()));
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

/// Monte Carlo estimate of Pr(e_h = 0) for a two-state chain.
inline double mc_chain_marginal(double p_init0, double p01, double p10, int h, std::size_t samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t zeros = 0;
  for (std::size_t n = 0; n < samples; ++n) {
    int e = u(rng) < p_init0 ? 0 : 1;
    for (int t = 0; t < h; ++t) e = e == 0 ? (u(rng) < p01 ? 1 : 0) : (u(rng) < p10 ? 0 : 1);
    zeros += e == 0;
  }
  return static_cast<double>(zeros) / static_cast<double>(samples);
}

/// Toy environment at population level: Pr_agent(s_h = 1) with A uniform and B
/// staying with probability `stay`, starting from s_0 = 0.
inline double toy_state_one(bool agent_b, int h, double stay = 0.75) {
  if (h == 0) return 0.0;
  if (!agent_b) return 0.5;
  double p = 0.0;
  for (int t = 0; t < h; ++t) p = p * stay + (1.0 - p) * (1.0 - stay);
  return p;
}

/// Population log-odds ln(Pr_A(s_h, s_{h+1}) / Pr_B(s_h, s_{h+1})) for equal dataset sizes.
inline double toy_log_odds(int h, int s, int s_next, double stay = 0.75) {
  const double pa_s = s == 1 ? toy_state_one(false, h) : 1.0 - toy_state_one(false, h);
  const double pb_s = s == 1 ? toy_state_one(true, h, stay) : 1.0 - toy_state_one(true, h, stay);
  const double pa = pa_s * 0.5;
  const double pb = pb_s * (s == s_next ? stay : 1.0 - stay);
  return std::log(pa / pb);
}

/// Population log-odds of bucket (u, v) for the encoder pair reading
/// observation coordinates (coord_h at h, coord_next at h + 1). Sums over the
/// latent pair and the exogenous bits of the two factors behind the coordinates.
inline double toy_bucket_log_odds(const craft::ToyEnvSpec& spec, int h, std::size_t coord_h, std::size_t coord_next,
                                  int u, int v, double stay = 0.75) {
  const std::size_t f = spec.factor_at[static_cast<std::size_t>(h)][coord_h];
  const std::size_t g = spec.factor_at[static_cast<std::size_t>(h + 1)][coord_next];
  auto marginal0 = [&](std::size_t factor, int t) {
    const auto& c = spec.chains[factor - 1];
    double p0 = c.p_init0;
    for (int k = 0; k < t; ++k) p0 = p0 * (1.0 - c.p01) + (1.0 - p0) * c.p10;
    return p0;
  };
  // Pr(e^f_h = x, e^g_{h+1} = y); factor 0 carries no exogenous bit
  auto exo = [&](int x, int y) {
    const double px = f == 0 ? (x == 0 ? 1.0 : 0.0) : (x == 0 ? marginal0(f, h) : 1.0 - marginal0(f, h));
    if (g == 0) return y == 0 ? px : 0.0;
    if (f == g) {
      const auto& c = spec.chains[f - 1];
      const double move = x == 0 ? c.p01 : c.p10;
      return px * (y == x ? 1.0 - move : move);
    }
    const double q0 = marginal0(g, h + 1);
    return px * (y == 0 ? q0 : 1.0 - q0);
  };
  double pa = 0.0;
  double pb = 0.0;
  for (int s = 0; s < 2; ++s) {
    for (int s_next = 0; s_next < 2; ++s_next) {
      const double a_s = s == 1 ? toy_state_one(false, h) : 1.0 - toy_state_one(false, h);
      const double b_s = s == 1 ? toy_state_one(true, h, stay) : 1.0 - toy_state_one(true, h, stay);
      const double joint_a = a_s * 0.5;
      const double joint_b = b_s * (s == s_next ? stay : 1.0 - stay);
      for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
          if ((s ^ x) != u || (s_next ^ y) != v) continue;
          pa += joint_a * exo(x, y);
          pb += joint_b * exo(x, y);
        }
      }
    }
  }
  return std::log(pa / pb);
}

}  // namespace oracle
