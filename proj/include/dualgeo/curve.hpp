#pragma once

#include "dualgeo/types.hpp"

#include <span>
#include <vector>

namespace dualgeo {

/// Position, velocity and acceleration of a path at parameter t.
struct CurveSample {
  double t = 0.0;
  Vec x;
  Vec v;
  Vec a;
};

/// A path t in [0, 1] -> M made of one or more smooth pieces. Inside a piece
/// the path is the quintic Hermite interpolant of its samples, so it is exact
/// at the samples and reproduces the position, velocity and acceleration
/// recorded there. Velocity may jump between pieces (polylines).
class Curve {
 public:
  Curve() = default;

  /// Throws std::invalid_argument unless the pieces are contiguous, start at
  /// t = 0, end at t = 1, and have strictly increasing times.
  static Curve from_pieces(std::vector<std::vector<CurveSample>> pieces);
  static Curve from_samples(std::vector<CurveSample> samples);

  /// Piecewise-linear path through `vertices`, with equal parameter time per
  /// segment.
  static Curve polyline(std::span<const Vec> vertices);

  Point position(double t) const;
  Tangent velocity(double t) const;

  Point start() const { return Point(pieces_.front().front().x); }
  Point end() const { return Point(pieces_.back().back().x); }
  int dim() const { return static_cast<int>(pieces_.front().front().x.size()); }

  std::size_t piece_count() const { return pieces_.size(); }
  double piece_begin(std::size_t piece) const { return pieces_[piece].front().t; }
  double piece_end(std::size_t piece) const { return pieces_[piece].back().t; }

  /// Evaluates piece `piece` at t (clamped to the piece); either output may be null.
  void eval(std::size_t piece, double t, Vec* x, Vec* v) const;

  const std::vector<std::vector<CurveSample>>& pieces() const { return pieces_; }

 private:
  std::size_t piece_of(double t) const;

  std::vector<std::vector<CurveSample>> pieces_;
};

}  // namespace dualgeo
