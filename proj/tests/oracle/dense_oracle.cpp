#include "dense_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace oracle {

namespace {

using Real = long double;

struct Resistor {
  int a, b;
  Real g;
};

struct Source {  // ideal voltage source from ground to node
  int node;
  Real v;
};

struct Switch {  // transistor channel a -> b
  int a, b;
  Real r_on, i_sat;
  bool clamped = false;
  Real clamp = 0;
};

struct Circuit {
  int nodes = 1;  // node 0 is ground
  std::vector<Resistor> res;
  std::vector<Source> src;
  std::vector<Switch> sw;
  std::vector<std::pair<int, Real>> inject;  // current into node

  int add() { return nodes++; }
};

std::vector<Real> gauss(std::vector<std::vector<Real>> m, std::vector<Real> rhs) {
  const std::size_t n = rhs.size();
  Real scale = 0;
  for (const auto& row : m)
    for (Real x : row) scale = std::max(scale, std::fabs(x));
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    if (std::fabs(m[piv][c]) <= scale * 1e-13L) throw Singular("zero pivot");
    std::swap(m[piv], m[c]);
    std::swap(rhs[piv], rhs[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const Real f = m[r][c] / m[c][c];
      if (f == 0) continue;
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  std::vector<Real> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Real s = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * x[k];
    x[i] = s / m[i][i];
  }
  return x;
}

// Returns node voltages (index 0 = ground) followed by source currents.
std::vector<Real> solve_once(const Circuit& c) {
  const int nv = c.nodes - 1;
  const int ns = static_cast<int>(c.src.size());
  const int n = nv + ns;
  std::vector<std::vector<Real>> m(n, std::vector<Real>(n, 0));
  std::vector<Real> rhs(n, 0);
  const auto stamp = [&](int a, int b, Real g) {
    if (a > 0) m[a - 1][a - 1] += g;
    if (b > 0) m[b - 1][b - 1] += g;
    if (a > 0 && b > 0) {
      m[a - 1][b - 1] -= g;
      m[b - 1][a - 1] -= g;
    }
  };
  const auto push = [&](int a, int b, Real i) {  // fixed current a -> b
    if (a > 0) rhs[a - 1] -= i;
    if (b > 0) rhs[b - 1] += i;
  };
  for (const auto& r : c.res) stamp(r.a, r.b, r.g);
  for (const auto& s : c.sw) {
    if (s.clamped) {
      push(s.a, s.b, s.clamp);
    } else {
      stamp(s.a, s.b, 1 / s.r_on);
    }
  }
  for (const auto& [node, i] : c.inject) push(0, node, i);
  for (int k = 0; k < ns; ++k) {
    const int row = nv + k;
    const int node = c.src[k].node;
    // Source current j enters `node`.
    m[node - 1][row] -= 1;
    m[row][node - 1] = 1;
    rhs[row] = c.src[k].v;
  }
  std::vector<Real> x = gauss(std::move(m), std::move(rhs));
  std::vector<Real> out(c.nodes + ns, 0);
  for (int i = 1; i < c.nodes; ++i) out[i] = x[i - 1];
  for (int k = 0; k < ns; ++k) out[c.nodes + k] = x[nv + k];
  return out;
}

}  // namespace

Result solve(const xpoint::CrossbarArray& array, const xpoint::BiasCondition& bias) {
  using xpoint::LineBias;
  const std::size_t nw = array.word_lines();
  const std::size_t nb = array.bit_lines();
  const Real r_line = array.line_resistance();

  Circuit c;
  const int prail = c.add();
  const int nrail = c.add();
  c.src.push_back({prail, bias.pmos_rail});
  c.src.push_back({nrail, bias.nmos_rail});

  // taps[w][b] along word line w; btaps[b][w] along bit line b.
  std::vector<std::vector<int>> wtap(nw, std::vector<int>(nb));
  std::vector<std::vector<int>> btap(nb, std::vector<int>(nw));
  for (std::size_t w = 0; w < nw; ++w) {
    for (std::size_t b = 0; b < nb; ++b) {
      wtap[w][b] = (b == 0 || r_line > 0) ? c.add() : wtap[w][0];
      if (b > 0 && r_line > 0) c.res.push_back({wtap[w][b - 1], wtap[w][b], 1 / r_line});
    }
  }
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t w = 0; w < nw; ++w) {
      btap[b][w] = (w == 0 || r_line > 0) ? c.add() : btap[b][0];
      if (w > 0 && r_line > 0) c.res.push_back({btap[b][w - 1], btap[b][w], 1 / r_line});
    }
  }

  struct Feed {
    std::optional<int> src;     // index into c.src
    std::optional<int> driver;  // index into c.sw
    Real fixed = 0;             // current source value
  };
  const auto attach = [&](const LineBias& lb, int node) {
    Feed f;
    if (lb.kind == LineBias::Kind::Voltage && !lb.driver) {
      f.src = static_cast<int>(c.src.size());
      c.src.push_back({node, lb.value});
    } else if (lb.kind == LineBias::Kind::Voltage) {
      const int s = c.add();
      c.src.push_back({s, lb.value});
      f.driver = static_cast<int>(c.sw.size());
      c.sw.push_back({s, node, lb.driver->r_on, lb.driver->i_sat});
    } else if (lb.kind == LineBias::Kind::Current) {
      c.inject.emplace_back(node, lb.value);
      f.fixed = lb.value;
    }
    return f;
  };

  std::vector<Feed> bit_feed(nb);
  for (std::size_t w = 0; w < nw; ++w) {
    attach(bias.word_lines[w], wtap[w][0]);
    if (const auto& d = array.drivers(w)) {
      if (bias.gates[w].nmos == xpoint::Gate::On) {
        c.sw.push_back({wtap[w][0], nrail, d->nmos.r_on, d->nmos.i_sat});
      } else {
        c.res.push_back({wtap[w][0], nrail, 1 / static_cast<Real>(d->nmos.r_off)});
      }
      if (bias.gates[w].pmos == xpoint::Gate::On) {
        c.sw.push_back({prail, wtap[w][0], d->pmos.r_on, d->pmos.i_sat});
      } else {
        c.res.push_back({prail, wtap[w][0], 1 / static_cast<Real>(d->pmos.r_off)});
      }
    }
  }
  for (std::size_t b = 0; b < nb; ++b) bit_feed[b] = attach(bias.bit_lines[b], btap[b][0]);

  std::vector<std::pair<std::size_t, Real>> devices;  // flat index, resistance
  std::vector<int> dev_res;
  for (std::size_t w = 0; w < nw; ++w) {
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& cell = array.cell(w, b);
      if (!cell) continue;
      const Real r = xpoint::mtj_resistance(cell->state, cell->params);
      dev_res.push_back(static_cast<int>(c.res.size()));
      devices.emplace_back(w * nb + b, r);
      c.res.push_back({btap[b][w], wtap[w][b], 1 / r});
    }
  }

  // Clamp transistors whose linear current exceeds saturation until stable.
  std::vector<Real> x;
  for (int pass = 0;; ++pass) {
    if (pass > 200) throw std::runtime_error("oracle clamp iteration did not settle");
    x = solve_once(c);
    bool changed = false;
    for (auto& s : c.sw) {
      const Real linear = (x[s.a] - x[s.b]) / s.r_on;
      if (s.clamped) {
        if (linear * (s.clamp > 0 ? 1 : -1) < s.i_sat) {
          s.clamped = false;
          changed = true;
        }
      } else if (std::fabs(linear) > s.i_sat) {
        s.clamped = true;
        s.clamp = linear > 0 ? s.i_sat : -s.i_sat;
        changed = true;
      }
    }
    if (!changed) break;
  }

  Result out;
  out.device_current.assign(nw * nb, 0.0);
  for (std::size_t k = 0; k < devices.size(); ++k) {
    const auto& r = c.res[dev_res[k]];
    out.device_current[devices[k].first] = static_cast<double>((x[r.a] - x[r.b]) * r.g);
  }
  for (std::size_t w = 0; w < nw; ++w) out.word_voltage.push_back(static_cast<double>(x[wtap[w][0]]));
  for (std::size_t b = 0; b < nb; ++b) {
    out.bit_voltage.push_back(static_cast<double>(x[btap[b][0]]));
    const Feed& f = bit_feed[b];
    Real i = f.fixed;
    if (f.src) i = x[c.nodes + *f.src];
    if (f.driver) {
      const auto& s = c.sw[*f.driver];
      i = s.clamped ? s.clamp : (x[s.a] - x[s.b]) / s.r_on;
    }
    out.bit_source_current.push_back(static_cast<double>(i));
  }

  // KCL check over every unknown node of the oracle's own circuit.
  std::vector<Real> net(c.nodes, 0);
  for (const auto& r : c.res) {
    const Real i = (x[r.a] - x[r.b]) * r.g;
    net[r.a] -= i;
    net[r.b] += i;
  }
  for (const auto& s : c.sw) {
    const Real i = s.clamped ? s.clamp : (x[s.a] - x[s.b]) / s.r_on;
    net[s.a] -= i;
    net[s.b] += i;
  }
  for (const auto& [node, i] : c.inject) net[node] += i;
  for (std::size_t k = 0; k < c.src.size(); ++k) net[c.src[k].node] += x[c.nodes + k];
  for (int i = 1; i < c.nodes; ++i)
    out.max_kcl = std::max(out.max_kcl, static_cast<double>(std::fabs(net[i])));
  return out;
}

double current_scale(const xpoint::CrossbarArray& array, const Result& r) {
  double lo = 0.0, hi = 0.0;
  for (const auto* vs : {&r.word_voltage, &r.bit_voltage}) {
    for (double v : *vs) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  double r_min = INFINITY;
  for (std::size_t w = 0; w < array.word_lines(); ++w) {
    for (std::size_t b = 0; b < array.bit_lines(); ++b) {
      const auto& d = array.cell(w, b);
      if (d) r_min = std::min(r_min, xpoint::mtj_resistance(d->state, d->params));
    }
  }
  return std::isfinite(r_min) ? (hi - lo) / r_min : 0.0;
}

}  // namespace oracle
