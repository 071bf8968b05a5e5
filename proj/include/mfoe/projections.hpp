#pragma once

#include <span>
#include <vector>

namespace mfoe {

// Least-squares projection onto the l1 ball of the given radius.
// Full-sort threshold algorithm; if the input is already inside the ball it
// is returned untouched (bitwise). Throws std::domain_error on non-finite
// input or radius <= 0.
std::vector<double> project_l1_ball(std::span<const double> x, double radius);

// In-place variant writing into out (out.size() == x.size()).
void project_l1_ball(std::span<const double> x, double radius, std::span<double> out);

// Least-squares projection onto the l2 ball: rescale when outside.
std::vector<double> project_l2_ball(std::span<const double> x, double radius);

void project_l2_ball(std::span<const double> x, double radius, std::span<double> out);

} // namespace mfoe
