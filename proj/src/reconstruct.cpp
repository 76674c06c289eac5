#include "ppfso3/reconstruct.hpp"

#include "ppfso3/errors.hpp"
#include "ppfso3/svd3.hpp"

#include <algorithm>

namespace ppfso3 {

namespace {

double weight_sum(const MeasurementFrame& frame) {
  double sum = 0.0;
  for (const VectorObservation& o : frame.observations) {
    sum += o.weight;
  }
  return sum;
}

}  // namespace

double wahba_cost(const MeasurementFrame& frame, const RotationMatrix& R) {
  const double sum = weight_sum(frame);
  double acc = 0.0;
  for (const VectorObservation& o : frame.observations) {
    acc += (o.weight / sum) * o.v_body_meas.dot(R.matrix().transpose() * o.v_inertial_ref);
  }
  return 1.0 - acc;
}

ReconstructedAttitude svd_attitude(const MeasurementFrame& frame) {
  if (frame.observations.size() < 2) {
    throw Error(ErrorKind::DegenerateProfile, "attitude reconstruction needs >= 2 observations",
                frame.t);
  }
  const double sum = weight_sum(frame);
  if (!(sum > 0.0)) {
    throw Error(ErrorKind::DegenerateProfile, "observation weights must be positive", frame.t);
  }

  Mat3 b = Mat3::Zero();
  for (const VectorObservation& o : frame.observations) {
    b += (o.weight / sum) * o.v_body_meas * o.v_inertial_ref.transpose();
  }

  const Svd3 s = svd3(b);
  if (s.sigma(1) < 1e-9) {
    throw Error(ErrorKind::DegenerateProfile, "vector profile has rank < 2", frame.t);
  }

  Mat3 du = Mat3::Identity();
  du(2, 2) = s.u.determinant() < 0.0 ? -1.0 : 1.0;
  Mat3 dv = Mat3::Identity();
  dv(2, 2) = s.v.determinant() < 0.0 ? -1.0 : 1.0;
  const Mat3 u_plus = s.u * du;
  const Mat3 v_plus = s.v * dv;

  ReconstructedAttitude out{RotationMatrix(v_plus * u_plus.transpose()), 0.0};
  out.residual = std::max(0.0, wahba_cost(frame, out.R_y));
  return out;
}

}  // namespace ppfso3
