#include <liekf/linear_model.hpp>

#include <stdexcept>

namespace liekf {

WindowBuffer run_linear_filter(const Mat3& P0, std::span<const LinearStep> steps, const FilterParams& params) {
  if (steps.empty()) {
    throw std::invalid_argument("run_linear_filter: empty window");
  }
  WindowBuffer buffer{FilterState{UnitQuaternion::identity(), P0}, {}};
  buffer.records.reserve(steps.size());

  Vec3 x = Vec3::Zero();
  Mat3 P = P0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const LinearStep& s = steps[k];
    StepRecord rec;
    rec.F = s.F;
    rec.H = s.H;
    rec.z = s.z;
    rec.x_prior = s.F * x;
    rec.P_prior = symmetrize(s.F * P * s.F.transpose() + params.Q);
    rec.innovation = s.z - s.H * rec.x_prior;
    try {
      const Correction c = kalman_correct(rec.P_prior, s.H, params.R, rec.innovation);
      rec.K = c.K;
      rec.x_post = rec.x_prior + c.dx;
      rec.P_post = c.P_post;
    } catch (const NumericalError& e) {
      throw StepError(k, e.what());
    }
    x = rec.x_post;
    P = rec.P_post;
    buffer.records.push_back(rec);
  }
  return buffer;
}

}  // namespace liekf
