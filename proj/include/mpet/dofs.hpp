#pragma once

#include "mpet/types.hpp"

namespace mpet {

// Dof partition of the coupled unknown (u; v_1..v_n; p_1..p_n):
// BDM1 displacement dofs (2 per edge), RT0 flux dofs (1 per edge and
// network), P0 pressure dofs (1 per cell and network).
struct DofLayout {
  int n = 0; // networks
  int E = 0; // edges
  int C = 0; // cells

  int u_size() const { return 2 * E; }
  int v_offset(int i) const { return 2 * E + i * E; }
  int p_offset(int i) const { return 2 * E + n * E + i * C; }
  int total() const { return 2 * E + n * E + n * C; }

  int u_dof(int edge, int moment) const { return 2 * edge + moment; }
  int v_dof(int i, int edge) const { return v_offset(i) + edge; }
  int p_dof(int i, int cell) const { return p_offset(i) + cell; }
};

// Flat coefficient vector with per-field views.
struct BlockVector {
  Vector x;
  DofLayout layout;

  BlockVector() = default;
  explicit BlockVector(const DofLayout &l) : x(Vector::Zero(l.total())), layout(l) {}
  BlockVector(const DofLayout &l, Vector values) : x(std::move(values)), layout(l) {}

  auto u() { return x.segment(0, layout.u_size()); }
  auto u() const { return x.segment(0, layout.u_size()); }
  auto v(int i) { return x.segment(layout.v_offset(i), layout.E); }
  auto v(int i) const { return x.segment(layout.v_offset(i), layout.E); }
  auto p(int i) { return x.segment(layout.p_offset(i), layout.C); }
  auto p(int i) const { return x.segment(layout.p_offset(i), layout.C); }
  // All flux respectively pressure dofs as one block.
  auto v_all() { return x.segment(layout.v_offset(0), layout.n * layout.E); }
  auto v_all() const { return x.segment(layout.v_offset(0), layout.n * layout.E); }
  auto p_all() { return x.segment(layout.p_offset(0), layout.n * layout.C); }
  auto p_all() const { return x.segment(layout.p_offset(0), layout.n * layout.C); }
};

} // namespace mpet
