// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace cemgms {

/// Nested coarse/fine rectangular grid hierarchy on the unit square.
///
/// The coarse grid has coarse_nx x coarse_ny cells and every coarse cell is
/// refined into fine_per_coarse^2 fine cells, so the refinement is exact by
/// construction. Cells and nodes are indexed row-major with the bottom row
/// (y = 0) first. Fine nodes on the boundary of the unit square carry
/// homogeneous Dirichlet data and are excluded from the interior numbering.
struct GridHierarchy {
  int coarse_nx = 0;
  int coarse_ny = 0;
  int fine_per_coarse = 0;
  int fine_nx = 0;
  int fine_ny = 0;
  double coarse_hx = 0.0;  ///< H along x (= 1 / coarse_nx)
  double coarse_hy = 0.0;
  double fine_hx = 0.0;    ///< h along x (= H / fine_per_coarse)
  double fine_hy = 0.0;

  int num_coarse_cells() const { return coarse_nx * coarse_ny; }
  int num_coarse_vertices() const { return (coarse_nx + 1) * (coarse_ny + 1); }
  int num_fine_cells() const { return fine_nx * fine_ny; }
  int num_fine_nodes() const { return (fine_nx + 1) * (fine_ny + 1); }
  int num_interior_nodes() const { return (fine_nx - 1) * (fine_ny - 1); }

  int fine_node_id(int ix, int iy) const { return iy * (fine_nx + 1) + ix; }
  int fine_node_x(int node) const { return node % (fine_nx + 1); }
  int fine_node_y(int node) const { return node / (fine_nx + 1); }
  int fine_cell_id(int ix, int iy) const { return iy * fine_nx + ix; }
  int fine_cell_x(int cell) const { return cell % fine_nx; }
  int fine_cell_y(int cell) const { return cell / fine_nx; }
  int coarse_cell_id(int cx, int cy) const { return cy * coarse_nx + cx; }
  int coarse_cell_x(int cell) const { return cell % coarse_nx; }
  int coarse_cell_y(int cell) const { return cell / coarse_nx; }
  int coarse_vertex_id(int vx, int vy) const { return vy * (coarse_nx + 1) + vx; }
  int coarse_vertex_x(int vertex) const { return vertex % (coarse_nx + 1); }
  int coarse_vertex_y(int vertex) const { return vertex / (coarse_nx + 1); }

  double node_coord_x(int node) const { return fine_node_x(node) * fine_hx; }
  double node_coord_y(int node) const { return fine_node_y(node) * fine_hy; }

  bool on_boundary(int node) const {
    const int ix = fine_node_x(node), iy = fine_node_y(node);
    return ix == 0 || ix == fine_nx || iy == 0 || iy == fine_ny;
  }

  /// Position of a fine node in the interior numbering, or -1 on the boundary.
  int interior_index(int node) const {
    const int ix = fine_node_x(node), iy = fine_node_y(node);
    if (ix <= 0 || ix >= fine_nx || iy <= 0 || iy >= fine_ny) return -1;
    return (iy - 1) * (fine_nx - 1) + (ix - 1);
  }

  /// Global fine-node id of the k-th interior node.
  int interior_node(int k) const {
    const int ix = k % (fine_nx - 1), iy = k / (fine_nx - 1);
    return fine_node_id(ix + 1, iy + 1);
  }
};

/// Connected union of whole coarse cells. All regions produced by this
/// library are axis-aligned boxes; the enumerated cell set is kept alongside
/// the inclusive bounding box so that membership stays explicit.
struct Region {
  int cx0 = 0, cy0 = 0;    ///< inclusive coarse-cell bounding box
  int cx1 = -1, cy1 = -1;
  std::vector<int> cells;  ///< coarse-cell ids, ascending

  bool empty() const { return cells.empty(); }
  int num_cells() const { return static_cast<int>(cells.size()); }
  int span_x() const { return cx1 - cx0 + 1; }
  int span_y() const { return cy1 - cy0 + 1; }

  bool operator==(const Region& other) const {
    return cx0 == other.cx0 && cy0 == other.cy0 && cx1 == other.cx1 &&
           cy1 == other.cy1 && cells == other.cells;
  }
};

/// Inclusive fine-node index box spanned by a region.
struct NodeBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;

  int span_x() const { return x1 - x0 + 1; }
  int span_y() const { return y1 - y0 + 1; }
  int num_nodes() const { return span_x() * span_y(); }
};

GridHierarchy build_hierarchy(int coarse_nx, int coarse_ny, int fine_per_coarse);

/// Region consisting of the cells in the given coarse-index box (clipped
/// bounds must already be valid).
Region make_box_region(const GridHierarchy& g, int cx0, int cy0, int cx1, int cy1);

/// Region of the single coarse element `element`.
Region coarse_element_region(const GridHierarchy& g, int element);

/// Union of the coarse cells sharing coarse vertex `vertex` (1, 2 or 4 cells
/// for corner, edge and interior vertices).
Region vertex_neighborhood(const GridHierarchy& g, int vertex);

/// Grows the region's bounding box by `layers` coarse cells per side,
/// clipped at the domain boundary. layers = 0 returns the input region.
Region oversample(const GridHierarchy& g, const Region& r, int layers);

/// Region covering the whole domain.
Region whole_domain(const GridHierarchy& g);

NodeBox region_node_box(const GridHierarchy& g, const Region& r);

/// Fine-cell ids covered by the region, ascending.
std::vector<int> fine_cells_in(const GridHierarchy& g, const Region& r);

/// All fine-node ids in the closed region, ascending (the canonical
/// local-to-global map used by every assembly routine).
std::vector<int> fine_nodes_in(const GridHierarchy& g, const Region& r);

/// Fine nodes strictly inside the region; nodes on the region boundary and
/// on the domain boundary are excluded.
std::vector<int> interior_nodes_in(const GridHierarchy& g, const Region& r);

}  // namespace cemgms
