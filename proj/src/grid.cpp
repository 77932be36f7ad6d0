// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#include "cemgms/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cemgms {

GridHierarchy build_hierarchy(int coarse_nx, int coarse_ny, int fine_per_coarse) {
  if (coarse_nx < 1 || coarse_ny < 1 || fine_per_coarse < 1) {
    throw std::invalid_argument("build_hierarchy: all counts must be >= 1");
  }
  GridHierarchy g;
  g.coarse_nx = coarse_nx;
  g.coarse_ny = coarse_ny;
  g.fine_per_coarse = fine_per_coarse;
  g.fine_nx = coarse_nx * fine_per_coarse;
  g.fine_ny = coarse_ny * fine_per_coarse;
  g.coarse_hx = 1.0 / coarse_nx;
  g.coarse_hy = 1.0 / coarse_ny;
  g.fine_hx = g.coarse_hx / fine_per_coarse;
  g.fine_hy = g.coarse_hy / fine_per_coarse;
  return g;
}

Region make_box_region(const GridHierarchy& g, int cx0, int cy0, int cx1, int cy1) {
  if (cx0 < 0 || cy0 < 0 || cx1 >= g.coarse_nx || cy1 >= g.coarse_ny ||
      cx0 > cx1 || cy0 > cy1) {
    throw std::invalid_argument("make_box_region: box out of range");
  }
  Region r;
  r.cx0 = cx0;
  r.cy0 = cy0;
  r.cx1 = cx1;
  r.cy1 = cy1;
  r.cells.reserve(static_cast<size_t>(r.span_x()) * r.span_y());
  for (int cy = cy0; cy <= cy1; ++cy)
    for (int cx = cx0; cx <= cx1; ++cx) r.cells.push_back(g.coarse_cell_id(cx, cy));
  return r;
}

Region coarse_element_region(const GridHierarchy& g, int element) {
  if (element < 0 || element >= g.num_coarse_cells()) {
    throw std::out_of_range("coarse_element_region: element index " +
                            std::to_string(element) + " out of range");
  }
  const int cx = g.coarse_cell_x(element), cy = g.coarse_cell_y(element);
  return make_box_region(g, cx, cy, cx, cy);
}

Region vertex_neighborhood(const GridHierarchy& g, int vertex) {
  if (vertex < 0 || vertex >= g.num_coarse_vertices()) {
    throw std::out_of_range("vertex_neighborhood: vertex index " +
                            std::to_string(vertex) + " out of range");
  }
  const int vx = g.coarse_vertex_x(vertex), vy = g.coarse_vertex_y(vertex);
  const int cx0 = std::max(vx - 1, 0), cx1 = std::min(vx, g.coarse_nx - 1);
  const int cy0 = std::max(vy - 1, 0), cy1 = std::min(vy, g.coarse_ny - 1);
  return make_box_region(g, cx0, cy0, cx1, cy1);
}

Region oversample(const GridHierarchy& g, const Region& r, int layers) {
  if (layers < 0) throw std::invalid_argument("oversample: layers must be >= 0");
  if (r.empty()) throw std::invalid_argument("oversample: empty region");
  if (layers == 0) return r;
  return make_box_region(g, std::max(r.cx0 - layers, 0), std::max(r.cy0 - layers, 0),
                         std::min(r.cx1 + layers, g.coarse_nx - 1),
                         std::min(r.cy1 + layers, g.coarse_ny - 1));
}

Region whole_domain(const GridHierarchy& g) {
  return make_box_region(g, 0, 0, g.coarse_nx - 1, g.coarse_ny - 1);
}

NodeBox region_node_box(const GridHierarchy& g, const Region& r) {
  NodeBox b;
  b.x0 = r.cx0 * g.fine_per_coarse;
  b.y0 = r.cy0 * g.fine_per_coarse;
  b.x1 = (r.cx1 + 1) * g.fine_per_coarse;
  b.y1 = (r.cy1 + 1) * g.fine_per_coarse;
  return b;
}

std::vector<int> fine_cells_in(const GridHierarchy& g, const Region& r) {
  std::vector<int> out;
  out.reserve(static_cast<size_t>(r.num_cells()) * g.fine_per_coarse * g.fine_per_coarse);
  const int f = g.fine_per_coarse;
  for (int iy = r.cy0 * f; iy < (r.cy1 + 1) * f; ++iy)
    for (int ix = r.cx0 * f; ix < (r.cx1 + 1) * f; ++ix)
      out.push_back(g.fine_cell_id(ix, iy));
  return out;
}

std::vector<int> fine_nodes_in(const GridHierarchy& g, const Region& r) {
  const NodeBox b = region_node_box(g, r);
  std::vector<int> out;
  out.reserve(static_cast<size_t>(b.num_nodes()));
  for (int iy = b.y0; iy <= b.y1; ++iy)
    for (int ix = b.x0; ix <= b.x1; ++ix) out.push_back(g.fine_node_id(ix, iy));
  return out;
}

std::vector<int> interior_nodes_in(const GridHierarchy& g, const Region& r) {
  const NodeBox b = region_node_box(g, r);
  std::vector<int> out;
  out.reserve(static_cast<size_t>(std::max(b.span_x() - 2, 0)) *
              std::max(b.span_y() - 2, 0));
  for (int iy = b.y0 + 1; iy <= b.y1 - 1; ++iy)
    for (int ix = b.x0 + 1; ix <= b.x1 - 1; ++ix) {
      const int node = g.fine_node_id(ix, iy);
      if (!g.on_boundary(node)) out.push_back(node);
    }
  return out;
}

}  // namespace cemgms
