#include "needle/discrete_ot.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "needle/errors.hpp"

namespace needle {

FiniteMetricSpace::FiniteMetricSpace(std::size_t n, std::vector<double> dist, bool check_triangle)
    : n_(n), dist_(std::move(dist)) {
  if (dist_.size() != n * n) throw ShapeError("FiniteMetricSpace: matrix must be n*n");
  for (std::size_t i = 0; i < n; ++i) {
    if ((*this)(i, i) != 0.0) throw DomainError("FiniteMetricSpace: diagonal must vanish");
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (*this)(i, j);
      if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("FiniteMetricSpace: distances must be finite and >= 0");
      if (d != (*this)(j, i)) throw DomainError("FiniteMetricSpace: matrix must be symmetric");
    }
  }
  if (check_triangle) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          if ((*this)(i, k) > (*this)(i, j) + (*this)(j, k) + 1e-12) {
            throw DomainError("FiniteMetricSpace: triangle inequality violated");
          }
        }
      }
    }
  }
}

FiniteMetricSpace FiniteMetricSpace::euclidean(std::span<const double> coords, std::size_t dim) {
  if (dim == 0 || coords.size() % dim != 0) throw ShapeError("euclidean: coordinate array shape");
  const std::size_t n = coords.size() / dim;
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double u = coords[i * dim + k] - coords[j * dim + k];
        s += u * u;
      }
      d[i * n + j] = d[j * n + i] = std::sqrt(s);
    }
  }
  return {n, std::move(d), false};
}

FiniteMetricSpace FiniteMetricSpace::line(std::span<const double> positions) {
  return euclidean(positions, 1);
}

DiscreteMeasure::DiscreteMeasure(std::vector<double> weights) : w_(std::move(weights)) {
  for (double v : w_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("DiscreteMeasure: weights must be finite and >= 0");
    mass_ += v;
  }
}

std::vector<double> EmdResult::dense_plan(std::size_t n) const {
  std::vector<double> m(n * n, 0.0);
  for (const auto& e : plan) m[e.from * n + e.to] += e.mass;
  return m;
}

namespace {

using Cost = std::int64_t;
constexpr Cost kUnreached = std::numeric_limits<Cost>::max() / 4;

class TransportSolver {
 public:
  TransportSolver(std::vector<double> supply, std::vector<double> demand, std::vector<Cost> cost)
      : s_(supply.size()),
        t_(demand.size()),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        cost_(std::move(cost)),
        flow_(s_ * t_, 0.0),
        pot_(s_ + t_, 0) {
    const double total = std::accumulate(supply_.begin(), supply_.end(), 0.0);
    eps_ = 1e-14 * std::max(total, 1e-300);
    for (std::size_t b = 0; b < t_; ++b) {
      Cost m = kUnreached;
      for (std::size_t a = 0; a < s_; ++a) m = std::min(m, c(a, b));
      pot_[s_ + b] = m;
    }
  }

  void solve() {
    while (has_supply()) {
      if (!dijkstra()) throw Error("emd_exact: no augmenting path (infeasible instance)");
      ++phases_;
      augment_admissible();
    }
  }

  [[nodiscard]] double flow(std::size_t a, std::size_t b) const { return flow_[a * t_ + b]; }
  [[nodiscard]] Cost potential(std::size_t v) const { return pot_[v]; }
  [[nodiscard]] std::size_t phases() const { return phases_; }
  [[nodiscard]] std::size_t augmentations() const { return augmentations_; }

 private:
  [[nodiscard]] Cost c(std::size_t a, std::size_t b) const { return cost_[a * t_ + b]; }
  [[nodiscard]] Cost reduced(std::size_t a, std::size_t b) const { return c(a, b) + pot_[a] - pot_[s_ + b]; }
  [[nodiscard]] bool has_supply() const {
    return std::any_of(supply_.begin(), supply_.end(), [&](double v) { return v > eps_; });
  }

  // Dense Dijkstra on reduced costs from all sources with remaining supply,
  // stopped at the nearest sink with remaining demand; potentials are shifted by
  // the truncated distances so shortest paths become zero reduced cost.
  bool dijkstra() {
    const std::size_t nv = s_ + t_;
    std::vector<Cost> dist(nv, kUnreached);
    std::vector<char> done(nv, 0);
    for (std::size_t a = 0; a < s_; ++a) {
      if (supply_[a] > eps_) dist[a] = 0;
    }
    Cost target = kUnreached;
    for (;;) {
      std::size_t v = nv;
      Cost best = kUnreached;
      for (std::size_t u = 0; u < nv; ++u) {
        if (!done[u] && dist[u] < best) {
          best = dist[u];
          v = u;
        }
      }
      if (v == nv) break;
      done[v] = 1;
      if (v < s_) {
        for (std::size_t b = 0; b < t_; ++b) {
          const Cost nd = best + reduced(v, b);
          if (nd < dist[s_ + b]) dist[s_ + b] = nd;
        }
      } else {
        const std::size_t b = v - s_;
        if (demand_[b] > eps_) {
          target = best;
          break;
        }
        for (std::size_t a = 0; a < s_; ++a) {
          if (flow_[a * t_ + b] > eps_) {
            const Cost nd = best - reduced(a, b);
            if (nd < dist[a]) dist[a] = nd;
          }
        }
      }
    }
    if (target == kUnreached) return false;
    for (std::size_t u = 0; u < nv; ++u) pot_[u] += std::min(dist[u], target);
    return true;
  }

  // Augments along zero-reduced-cost paths until none is found from any source.
  void augment_admissible() {
    const std::size_t nv = s_ + t_;
    std::vector<std::size_t> cur(nv, 0);
    std::vector<char> dead(nv, 0);
    std::vector<char> on_path(nv, 0);
    std::vector<std::size_t> path;
    for (std::size_t root = 0; root < s_; ++root) {
      while (supply_[root] > eps_ && !dead[root]) {
        path.assign(1, root);
        on_path[root] = 1;
        bool found = false;
        while (!path.empty()) {
          const std::size_t v = path.back();
          if (v >= s_ && demand_[v - s_] > eps_) {
            found = true;
            break;
          }
          const std::size_t next = advance(v, cur, dead, on_path);
          if (next == nv) {
            dead[v] = 1;
            on_path[v] = 0;
            path.pop_back();
          } else {
            on_path[next] = 1;
            path.push_back(next);
          }
        }
        for (std::size_t u : path) on_path[u] = 0;
        if (!found) break;
        push_along(path);
      }
    }
  }

  std::size_t advance(std::size_t v, std::vector<std::size_t>& cur, const std::vector<char>& dead,
                      const std::vector<char>& on_path) const {
    const std::size_t nv = s_ + t_;
    if (v < s_) {
      for (std::size_t& b = cur[v]; b < t_; ++b) {
        const std::size_t w = s_ + b;
        if (!dead[w] && !on_path[w] && reduced(v, b) == 0) return w;
      }
      return nv;
    }
    const std::size_t b = v - s_;
    for (std::size_t& a = cur[v]; a < s_; ++a) {
      if (!dead[a] && !on_path[a] && flow_[a * t_ + b] > eps_ && reduced(a, b) == 0) return a;
    }
    return nv;
  }

  void push_along(const std::vector<std::size_t>& path) {
    double delta = std::min(supply_[path.front()], demand_[path.back() - s_]);
    for (std::size_t k = 1; k + 1 < path.size(); k += 2) {
      delta = std::min(delta, flow_[path[k + 1] * t_ + (path[k] - s_)]);
    }
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      if (k % 2 == 0) {
        flow_[path[k] * t_ + (path[k + 1] - s_)] += delta;
      } else {
        double& f = flow_[path[k + 1] * t_ + (path[k] - s_)];
        f -= delta;
        if (f < eps_) f = 0.0;
      }
    }
    supply_[path.front()] -= delta;
    demand_[path.back() - s_] -= delta;
    ++augmentations_;
  }

  std::size_t s_;
  std::size_t t_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::vector<Cost> cost_;
  std::vector<double> flow_;
  std::vector<Cost> pot_;
  double eps_ = 0.0;
  std::size_t phases_ = 0;
  std::size_t augmentations_ = 0;
};

double ground_cost(double d, int p) { return p == 1 ? d : d * d; }

}  // namespace

EmdResult emd_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const FiniteMetricSpace& space,
                    int p) {
  const std::size_t n = space.size();
  if (p != 1 && p != 2) throw DomainError("emd_exact: p must be 1 or 2");
  if (n > kMaxOtPoints) throw DomainError("emd_exact: size limit exceeded");
  if (mu.size() != n || nu.size() != n) throw ShapeError("emd_exact: measure size differs from space size");
  const double mm = mu.mass();
  const double nm = nu.mass();
  if (std::abs(mm - nm) > 1e-9 * std::max({mm, nm, 1.0})) throw MassMismatchError("emd_exact: masses differ");
  const double nu_scale = nm > 0.0 ? mm / nm : 1.0;

  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu.weights()[i] > 0.0) src.push_back(i);
    if (nu.weights()[i] > 0.0) dst.push_back(i);
  }
  EmdResult res;
  res.phi.assign(n, 0.0);
  res.psi.assign(n, 0.0);
  if (src.empty() || dst.empty()) return res;

  double max_cost = 0.0;
  for (std::size_t i : src) {
    for (std::size_t j : dst) max_cost = std::max(max_cost, ground_cost(space(i, j), p));
  }
  // Keep potentials (bounded by path lengths) far from int64 overflow.
  const double scale = max_cost > 0.0 ? std::min(kCostScale, 1e15 / max_cost) : kCostScale;

  std::vector<double> supply(src.size());
  std::vector<double> demand(dst.size());
  for (std::size_t a = 0; a < src.size(); ++a) supply[a] = mu.weights()[src[a]];
  for (std::size_t b = 0; b < dst.size(); ++b) demand[b] = nu.weights()[dst[b]] * nu_scale;
  std::vector<Cost> cost(src.size() * dst.size());
  for (std::size_t a = 0; a < src.size(); ++a) {
    for (std::size_t b = 0; b < dst.size(); ++b) {
      cost[a * dst.size() + b] = std::llround(ground_cost(space(src[a], dst[b]), p) * scale);
    }
  }

  TransportSolver solver(std::move(supply), std::move(demand), std::move(cost));
  solver.solve();
  res.phases = solver.phases();
  res.augmentations = solver.augmentations();

  for (std::size_t a = 0; a < src.size(); ++a) {
    for (std::size_t b = 0; b < dst.size(); ++b) {
      const double f = solver.flow(a, b);
      if (f > 0.0) {
        res.plan.push_back({src[a], dst[b], f});
        res.cost += f * ground_cost(space(src[a], dst[b]), p);
      }
    }
  }

  // phi = -P on sources, psi = P on sinks; extended to the remaining points by
  // the c-transform so the dual is feasible everywhere.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<char> is_src(n, 0);
  std::vector<char> is_dst(n, 0);
  for (std::size_t a = 0; a < src.size(); ++a) {
    res.phi[src[a]] = -static_cast<double>(solver.potential(a)) / scale;
    is_src[src[a]] = 1;
  }
  for (std::size_t b = 0; b < dst.size(); ++b) {
    res.psi[dst[b]] = static_cast<double>(solver.potential(src.size() + b)) / scale;
    is_dst[dst[b]] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (is_src[i]) continue;
    double m = kInf;
    for (std::size_t j : dst) m = std::min(m, ground_cost(space(i, j), p) - res.psi[j]);
    res.phi[i] = m;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (is_dst[j]) continue;
    double m = kInf;
    for (std::size_t i : src) m = std::min(m, ground_cost(space(i, j), p) - res.phi[i]);
    res.psi[j] = m;
  }
  for (std::size_t i : src) res.dual_objective += mu.weights()[i] * res.phi[i];
  for (std::size_t j : dst) res.dual_objective += nu.weights()[j] * nu_scale * res.psi[j];
  return res;
}

DualCertificate certify(const EmdResult& r, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const FiniteMetricSpace& space, int p) {
  const std::size_t n = space.size();
  DualCertificate cert;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu.weights()[i] <= 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (nu.weights()[j] <= 0.0) continue;
      cert.max_violation =
          std::max(cert.max_violation, r.phi[i] + r.psi[j] - ground_cost(space(i, j), p));
    }
  }
  std::vector<double> out(n, 0.0);
  std::vector<double> in(n, 0.0);
  for (const auto& e : r.plan) {
    cert.max_support_slack = std::max(
        cert.max_support_slack, std::abs(r.phi[e.from] + r.psi[e.to] - ground_cost(space(e.from, e.to), p)));
    out[e.from] += e.mass;
    in[e.to] += e.mass;
  }
  const double nu_scale = nu.mass() > 0.0 ? mu.mass() / nu.mass() : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    cert.max_marginal_error = std::max(cert.max_marginal_error, std::abs(out[i] - mu.weights()[i]));
    cert.max_marginal_error = std::max(cert.max_marginal_error, std::abs(in[i] - nu.weights()[i] * nu_scale));
  }
  cert.gap = std::abs(r.cost - r.dual_objective);
  return cert;
}

namespace {

template <class T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) buf[k] = static_cast<unsigned char>((v >> (8 * k)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ParseError("DOTM: truncated header");
  T v = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) v |= static_cast<T>(buf[k]) << (8 * k);
  return v;
}

}  // namespace

void write_dotm(std::ostream& out, const FiniteMetricSpace& space) {
  out.write("DOTM", 4);
  put_le<std::uint32_t>(out, kDotmVersion);
  put_le<std::uint64_t>(out, space.size());
  for (double d : space.matrix()) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &d, sizeof bits);
    put_le<std::uint64_t>(out, bits);
  }
}

FiniteMetricSpace read_dotm(std::istream& in, bool check_triangle) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "DOTM", 4) != 0) throw ParseError("DOTM: bad magic");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kDotmVersion) throw ParseError("DOTM: unsupported version");
  const auto n = get_le<std::uint64_t>(in);
  if (n > kMaxOtPoints) throw ParseError("DOTM: n exceeds the supported size");
  std::vector<double> d(n * n);
  for (double& v : d) {
    const auto bits = get_le<std::uint64_t>(in);
    std::memcpy(&v, &bits, sizeof v);
  }
  return {static_cast<std::size_t>(n), std::move(d), check_triangle};
}

}  // namespace needle
