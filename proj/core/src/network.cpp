#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "xpoint/crossbar.hpp"
#include "xpoint/errors.hpp"

namespace xpoint {

namespace {

constexpr std::size_t kDenseLimit = 1500;

struct DisjointSet {
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

// Conductance of an element while it is not clamped; 0 for current sources.
double conductance(const Element& e) {
  if (e.kind == ElementKind::CurrentSource) return 0.0;
  if (e.transistor) return 1.0 / e.transistor->r_on;
  return 1.0 / e.resistance;
}

std::size_t add_node(Network& net, std::string label, bool fixed = false, double v = 0.0) {
  net.nodes.push_back(Node{std::move(label), fixed, v});
  return net.nodes.size() - 1;
}

}  // namespace

std::size_t Network::unknown_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return !n.fixed; }));
}

Network build_network(const CrossbarArray& array, const BiasCondition& bias) {
  validate(bias, array);
  const std::size_t nw = array.word_lines();
  const std::size_t nb = array.bit_lines();
  const bool segmented = array.line_resistance() > 0.0;

  Network net;
  net.word_line_count = nw;
  net.bit_line_count = nb;
  const std::size_t gnd = add_node(net, "GND", true, 0.0);
  const std::size_t prail = add_node(net, "PMOS_RAIL", true, bias.pmos_rail);
  const std::size_t nrail = add_node(net, "NMOS_RAIL", true, bias.nmos_rail);

  net.word_tap.assign(nw, std::vector<std::size_t>(nb));
  net.bit_tap.assign(nb, std::vector<std::size_t>(nw));
  net.word_node.resize(nw);
  net.bit_node.resize(nb);

  auto make_line = [&](const std::string& label, const LineBias& lb, std::size_t taps,
                       std::vector<std::size_t>& tap_out) -> std::size_t {
    const bool fixed_attach = lb.is_ideal_voltage();
    const std::size_t attach = add_node(net, label, fixed_attach, fixed_attach ? lb.value : 0.0);
    tap_out[0] = attach;
    for (std::size_t k = 1; k < taps; ++k) {
      if (!segmented) {
        tap_out[k] = attach;
        continue;
      }
      tap_out[k] = add_node(net, label + "." + std::to_string(k));
      Element wire;
      wire.kind = ElementKind::Wire;
      wire.a = tap_out[k - 1];
      wire.b = tap_out[k];
      wire.resistance = array.line_resistance();
      net.elements.push_back(wire);
    }
    return attach;
  };

  auto attach_source = [&](const std::string& label, const LineBias& lb, std::size_t node,
                           bool bit_side, std::size_t index) {
    if (lb.kind == LineBias::Kind::Voltage && lb.driver) {
      const std::size_t src = add_node(net, "SRC(" + label + ")", true, lb.value);
      Element e;
      e.kind = ElementKind::LineDriver;
      e.a = src;
      e.b = node;
      e.transistor = *lb.driver;
      e.is_line_on_bit_side = bit_side;
      (bit_side ? e.bit_line : e.word_line) = index;
      net.elements.push_back(e);
    } else if (lb.kind == LineBias::Kind::Current) {
      Element e;
      e.kind = ElementKind::CurrentSource;
      e.a = gnd;
      e.b = node;
      e.current = lb.value;
      e.is_line_on_bit_side = bit_side;
      (bit_side ? e.bit_line : e.word_line) = index;
      net.elements.push_back(e);
    }
  };

  for (std::size_t w = 0; w < nw; ++w) {
    const auto label = array.word_line_label(w);
    net.word_node[w] = make_line(label, bias.word_lines[w], nb, net.word_tap[w]);
    attach_source(label, bias.word_lines[w], net.word_node[w], false, w);
    if (const auto& drv = array.drivers(w)) {
      Element n;
      n.kind = ElementKind::WordNmos;
      n.a = net.word_node[w];
      n.b = nrail;
      n.word_line = w;
      if (bias.gates[w].nmos == Gate::On) {
        n.transistor = drv->nmos;
      } else {
        n.resistance = drv->nmos.r_off;
      }
      net.elements.push_back(n);

      Element p;
      p.kind = ElementKind::WordPmos;
      p.a = prail;
      p.b = net.word_node[w];
      p.word_line = w;
      if (bias.gates[w].pmos == Gate::On) {
        p.transistor = drv->pmos;
      } else {
        p.resistance = drv->pmos.r_off;
      }
      net.elements.push_back(p);
    }
  }
  for (std::size_t b = 0; b < nb; ++b) {
    const auto label = array.bit_line_label(b);
    net.bit_node[b] = make_line(label, bias.bit_lines[b], nw, net.bit_tap[b]);
    attach_source(label, bias.bit_lines[b], net.bit_node[b], true, b);
  }

  for (std::size_t w = 0; w < nw; ++w) {
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& c = array.cell(w, b);
      if (!c) continue;
      Element e;
      e.kind = ElementKind::Device;
      e.a = net.bit_tap[b][w];
      e.b = net.word_tap[w][b];
      e.resistance = mtj_resistance(c->state, c->params);
      e.word_line = w;
      e.bit_line = b;
      net.elements.push_back(e);
    }
  }
  return net;
}

namespace {

// Checks that every unknown node reaches a fixed node through conducting
// elements. Clamped transistors conduct a fixed current and do not count.
void check_connectivity(const Network& net, const std::vector<bool>& clamped) {
  DisjointSet ds(net.nodes.size());
  for (std::size_t k = 0; k < net.elements.size(); ++k) {
    const auto& e = net.elements[k];
    if (e.kind == ElementKind::CurrentSource || clamped[k]) continue;
    ds.unite(e.a, e.b);
  }
  std::vector<bool> grounded(net.nodes.size(), false);
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (net.nodes[i].fixed) grounded[ds.find(i)] = true;
  std::vector<std::string> floating;
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (!net.nodes[i].fixed && !grounded[ds.find(i)]) floating.push_back(net.nodes[i].label);
  if (!floating.empty()) {
    std::string msg = "singular network: floating subgraph without a path to a driven node: {";
    for (std::size_t i = 0; i < floating.size(); ++i) msg += (i ? ", " : "") + floating[i];
    msg += "}";
    throw SingularNetworkError(msg, floating);
  }
}

Eigen::VectorXd solve_linear(const Network& net, const std::vector<long>& index,
                             std::size_t unknowns, const std::vector<bool>& clamped,
                             const std::vector<double>& clamp_current) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(unknowns));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(net.elements.size() * 4);

  for (std::size_t k = 0; k < net.elements.size(); ++k) {
    const auto& e = net.elements[k];
    const long ia = index[e.a];
    const long ib = index[e.b];
    if (e.kind == ElementKind::CurrentSource || clamped[k]) {
      const double i = e.kind == ElementKind::CurrentSource ? e.current : clamp_current[k];
      if (ia >= 0) rhs[ia] -= i;
      if (ib >= 0) rhs[ib] += i;
      continue;
    }
    const double g = conductance(e);
    if (ia >= 0) trip.emplace_back(ia, ia, g);
    if (ib >= 0) trip.emplace_back(ib, ib, g);
    if (ia >= 0 && ib >= 0) {
      trip.emplace_back(ia, ib, -g);
      trip.emplace_back(ib, ia, -g);
    }
    if (ia >= 0 && ib < 0) rhs[ia] += g * net.nodes[e.b].voltage;
    if (ib >= 0 && ia < 0) rhs[ib] += g * net.nodes[e.a].voltage;
  }

  const auto n = static_cast<Eigen::Index>(unknowns);
  if (unknowns <= kDenseLimit) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : trip) g(t.row(), t.col()) += t.value();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw SingularNetworkError("singular network: conductance matrix is not positive definite",
                                 {});
    }
    Eigen::VectorXd x = ldlt.solve(rhs);
    // One step of iterative refinement keeps the KCL residual at round-off.
    const Eigen::VectorXd r = rhs - g * x;
    x += ldlt.solve(r);
    return x;
  }
  Eigen::SparseMatrix<double> g(n, n);
  g.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(g);
  if (ldlt.info() != Eigen::Success) {
    throw SingularNetworkError("singular network: sparse factorisation failed", {});
  }
  Eigen::VectorXd x = ldlt.solve(rhs);
  const Eigen::VectorXd r = rhs - g * x;
  x += ldlt.solve(r);
  return x;
}

}  // namespace

double NetworkSolution::supply_current(const Network& net) const {
  std::vector<double> out(net.nodes.size(), 0.0);
  for (std::size_t k = 0; k < net.elements.size(); ++k) {
    out[net.elements[k].a] += element_currents[k];
    out[net.elements[k].b] -= element_currents[k];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (net.nodes[i].fixed && net.nodes[i].voltage > 0.0) total += std::max(out[i], 0.0);
  return total;
}

NetworkSolution solve_network(const Network& net, const SolveOptions& opt) {
  const std::size_t ne = net.elements.size();
  std::vector<long> index(net.nodes.size(), -1);
  std::size_t unknowns = 0;
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (!net.nodes[i].fixed) index[i] = static_cast<long>(unknowns++);

  std::size_t transistors = 0;
  for (const auto& e : net.elements) transistors += (e.transistor.has_value() ? 1 : 0);
  const std::size_t bound =
      opt.max_clamp_iterations ? opt.max_clamp_iterations : transistors + 2;

  std::vector<bool> clamped(ne, false);
  std::vector<double> clamp_current(ne, 0.0);
  std::vector<double> v(net.nodes.size(), 0.0);
  std::vector<double> current(ne, 0.0);
  std::size_t iter = 0;

  for (;; ++iter) {
    if (iter >= bound) {
      throw ConvergenceError("transistor saturation iteration did not converge after " +
                             std::to_string(bound) + " passes");
    }
    check_connectivity(net, clamped);
    const Eigen::VectorXd x = solve_linear(net, index, unknowns, clamped, clamp_current);
    for (std::size_t i = 0; i < net.nodes.size(); ++i)
      v[i] = index[i] >= 0 ? x[index[i]] : net.nodes[i].voltage;

    bool changed = false;
    for (std::size_t k = 0; k < ne; ++k) {
      const auto& e = net.elements[k];
      const double dv = v[e.a] - v[e.b];
      if (e.kind == ElementKind::CurrentSource) {
        current[k] = e.current;
        continue;
      }
      if (!e.transistor) {
        current[k] = dv / e.resistance;
        continue;
      }
      const double linear = dv / e.transistor->r_on;
      if (clamped[k]) {
        current[k] = clamp_current[k];
        // Release the clamp once the linear region can carry the current.
        if (linear * std::copysign(1.0, clamp_current[k]) < e.transistor->i_sat) {
          clamped[k] = false;
          changed = true;
        }
      } else {
        current[k] = linear;
        if (std::abs(linear) > e.transistor->i_sat) {
          clamped[k] = true;
          clamp_current[k] = std::copysign(e.transistor->i_sat, linear);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  NetworkSolution sol;
  sol.node_voltages = v;
  sol.element_currents = current;
  sol.clamped = clamped;
  sol.clamp_iterations = iter + 1;
  sol.bit_lines = net.bit_line_count;
  sol.word_line_voltages.resize(net.word_line_count);
  sol.bit_line_voltages.resize(net.bit_line_count);
  for (std::size_t w = 0; w < net.word_line_count; ++w) sol.word_line_voltages[w] = v[net.word_node[w]];
  for (std::size_t b = 0; b < net.bit_line_count; ++b) sol.bit_line_voltages[b] = v[net.bit_node[b]];
  sol.device_currents.assign(net.word_line_count * net.bit_line_count, 0.0);
  sol.nmos_currents.assign(net.word_line_count, 0.0);
  sol.pmos_currents.assign(net.word_line_count, 0.0);
  sol.word_source_currents.assign(net.word_line_count, 0.0);
  sol.bit_source_currents.assign(net.bit_line_count, 0.0);

  std::vector<double> net_out(net.nodes.size(), 0.0);
  // Size of the terms summed at each node, i.e. what rounding in v scales with.
  std::vector<double> node_scale(net.nodes.size(), 0.0);
  for (std::size_t k = 0; k < ne; ++k) {
    const auto& e = net.elements[k];
    net_out[e.a] += current[k];
    net_out[e.b] -= current[k];
    double term = std::abs(current[k]);
    if (e.kind != ElementKind::CurrentSource && !clamped[k]) {
      const double r = e.transistor ? e.transistor->r_on : e.resistance;
      term = std::max(term, (std::abs(v[e.a]) + std::abs(v[e.b])) / r);
    }
    node_scale[e.a] += term;
    node_scale[e.b] += term;
    sol.max_branch_current = std::max(sol.max_branch_current, std::abs(current[k]));
    switch (e.kind) {
      case ElementKind::Device:
        sol.device_currents[e.word_line * net.bit_line_count + e.bit_line] = current[k];
        break;
      case ElementKind::WordNmos:
        sol.nmos_currents[e.word_line] = current[k];
        break;
      case ElementKind::WordPmos:
        sol.pmos_currents[e.word_line] = current[k];
        break;
      case ElementKind::LineDriver:
      case ElementKind::CurrentSource:
        (e.is_line_on_bit_side ? sol.bit_source_currents[e.bit_line]
                               : sol.word_source_currents[e.word_line]) = current[k];
        if (e.kind == ElementKind::CurrentSource)
          sol.supply_power += current[k] * (v[e.b] - v[e.a]);
        break;
      case ElementKind::Wire:
        break;
    }
  }
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    if (net.nodes[i].fixed) {
      sol.supply_power += net.nodes[i].voltage * net_out[i];
    } else {
      sol.kcl_residual = std::max(sol.kcl_residual, std::abs(net_out[i]));
      if (node_scale[i] > 0.0)
        sol.kcl_relative = std::max(sol.kcl_relative, std::abs(net_out[i]) / node_scale[i]);
    }
  }
  // Ideal voltage lines: the source supplies everything leaving the node.
  for (std::size_t w = 0; w < net.word_line_count; ++w)
    if (net.nodes[net.word_node[w]].fixed) sol.word_source_currents[w] = net_out[net.word_node[w]];
  for (std::size_t b = 0; b < net.bit_line_count; ++b)
    if (net.nodes[net.bit_node[b]].fixed) sol.bit_source_currents[b] = net_out[net.bit_node[b]];
  return sol;
}

NetworkSolution solve(const CrossbarArray& array, const BiasCondition& bias,
                      const SolveOptions& opt) {
  return solve_network(build_network(array, bias), opt);
}

SneakBreakdown sneak_decomposition(const NetworkSolution& sol, const CrossbarArray& array,
                                   std::size_t word_line, std::size_t bit_line) {
  if (!array.cell(word_line, bit_line)) {
    throw ParameterError("sneak_decomposition: no device at " + array.word_line_label(word_line) +
                         "/" + array.bit_line_label(bit_line));
  }
  SneakBreakdown out;
  out.source = sol.bit_source_currents.at(bit_line);
  out.main = sol.device_current(word_line, bit_line);
  out.sneak_sum = out.source - out.main;
  for (std::size_t w = 0; w < array.word_lines(); ++w) {
    if (w == word_line || !array.cell(w, bit_line)) continue;
    out.per_path.push_back(SneakPath{w, sol.device_current(w, bit_line)});
  }
  return out;
}

double equivalent_resistance(const CrossbarArray& array, LineRef a, LineRef b,
                             const BiasCondition& bias) {
  if (a == b) throw ParameterError("equivalent_resistance: nodes must be distinct");
  BiasCondition probe = BiasCondition::all_floating(array);
  probe.gates = bias.gates;
  probe.pmos_rail = 0.0;
  probe.nmos_rail = 0.0;
  auto& la = a.side == LineRef::Side::Word ? probe.word_lines.at(a.index) : probe.bit_lines.at(a.index);
  auto& lb = b.side == LineRef::Side::Word ? probe.word_lines.at(b.index) : probe.bit_lines.at(b.index);
  constexpr double kTestCurrent = 1e-6;
  la = LineBias::current(kTestCurrent);
  lb = LineBias::ground();

  Network net = build_network(array, probe);
  // Small-signal view: transistors never saturate at the probe level.
  for (auto& e : net.elements)
    if (e.transistor) e.transistor->i_sat = std::numeric_limits<double>::infinity();

  // Anything not connected to either probe or a rail cannot carry current;
  // pin it so the system stays definite, and detect an open circuit at `a`.
  DisjointSet ds(net.nodes.size());
  for (const auto& e : net.elements)
    if (e.kind != ElementKind::CurrentSource) ds.unite(e.a, e.b);
  std::vector<bool> has_fixed(net.nodes.size(), false);
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (net.nodes[i].fixed) has_fixed[ds.find(i)] = true;
  const std::size_t node_a = a.side == LineRef::Side::Word ? net.word_node[a.index] : net.bit_node[a.index];
  if (!has_fixed[ds.find(node_a)]) return std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    if (!net.nodes[i].fixed && !has_fixed[ds.find(i)]) {
      net.nodes[i].fixed = true;
      net.nodes[i].voltage = 0.0;
    }
  }
  const NetworkSolution sol = solve_network(net);
  return sol.node_voltages[node_a] / kTestCurrent;
}

}  // namespace xpoint
