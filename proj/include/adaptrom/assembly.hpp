#pragma once

#include "adaptrom/femspace.hpp"
#include "adaptrom/linalg.hpp"

namespace adaptrom {

/// Bilinear forms of the weak formulation on the full space, Dirichlet
/// nodes included.
///
///   mass        (u, v)                 velocity x velocity
///   stiffness   (grad u, grad v)       velocity x velocity; a(u,v) = stiffness / Re
///   divergence  b(v, q) = -(q, div v)  pressure x velocity
///   pressure_mass (p, q)               pressure x pressure
///   pressure_mean int q                one entry per pressure dof
struct FormSet {
  SparseMatrix mass;
  SparseMatrix stiffness;
  SparseMatrix divergence;
  SparseMatrix pressure_mass;
  Vector pressure_mean;
};

FormSet assemble_forms(const TaylorHoodSpace& space);

/// Linearizations of c(w,u,v) = ((w . grad) u, v):
///   v^T advect u = c(w, u, v),  v^T react u = c(u, w, v).
struct ConvectionPair {
  SparseMatrix advect;
  SparseMatrix react;
};

ConvectionPair convection_matrix(const TaylorHoodSpace& space, const Vector& w);
/// Vector with entries c(w, u, phi_i) over all velocity basis functions.
Vector convection_vector(const TaylorHoodSpace& space, const Vector& w, const Vector& u);
double apply_trilinear(const TaylorHoodSpace& space, const Vector& w, const Vector& u,
                       const Vector& v);

/// Entries (f, phi_i) for a smooth source f, by the degree-five rule.
Vector load_vector(const TaylorHoodSpace& space, const VectorFunction& f);

/// Entries (u_src, phi_i) over the target's velocity basis, where u_src lives
/// on another space of the same forest. Integrated exactly on the overlay of
/// both meshes.
Vector cross_mass(const FeField& source, const TaylorHoodSpace& target);

}  // namespace adaptrom
