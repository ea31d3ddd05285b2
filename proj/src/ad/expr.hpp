#pragma once

#include <cmath>

#include "ad/graph.hpp"

namespace pglake::ad {

// Thin handle that lets elementwise formulas be written once and evaluated
// either on plain doubles or on graph nodes. Shapes must match between
// operands; scalars broadcast through scale/add_scalar.
struct Expr {
  Graph* g = nullptr;
  Graph::NodeId id = -1;

  const Tensor& value() const { return g->value(id); }
};

inline Expr operator+(Expr a, Expr b) { return {a.g, a.g->add(a.id, b.id)}; }
inline Expr operator-(Expr a, Expr b) { return {a.g, a.g->sub(a.id, b.id)}; }
inline Expr operator*(Expr a, Expr b) { return {a.g, a.g->mul(a.id, b.id)}; }
inline Expr operator/(Expr a, Expr b) { return {a.g, a.g->div(a.id, b.id)}; }

inline Expr operator+(Expr a, double c) { return {a.g, a.g->add_scalar(a.id, c)}; }
inline Expr operator+(double c, Expr a) { return a + c; }
inline Expr operator-(Expr a, double c) { return a + (-c); }
inline Expr operator-(double c, Expr a) { return {a.g, a.g->add_scalar(a.g->scale(a.id, -1.0), c)}; }
inline Expr operator*(Expr a, double c) { return {a.g, a.g->scale(a.id, c)}; }
inline Expr operator*(double c, Expr a) { return a * c; }
inline Expr operator/(Expr a, double c) { return a * (1.0 / c); }

inline Expr square(Expr a) { return {a.g, a.g->square(a.id)}; }
inline Expr relu(Expr a) { return {a.g, a.g->relu(a.id)}; }
inline Expr abs(Expr a) { return {a.g, a.g->abs(a.id)}; }

inline double square(double a) { return a * a; }
inline double relu(double a) { return a > 0.0 ? a : 0.0; }

}  // namespace pglake::ad
