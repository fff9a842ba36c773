#include "smal/localization.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "smal/errors.hpp"

namespace smal::localization {

using magnetics::DipoleSource;

Pose6D orthogonalized(const Pose6D& pose) {
    Pose6D out = pose;
    out.heading = unit(pose.heading);
    Vec3 m = pose.moment_dir - pose.moment_dir.dot(out.heading) * out.heading;
    const double n = m.norm();
    if (n < 1e-12) {
        throw DegenerateGeometryError("moment parallel to heading; cannot orthogonalize");
    }
    out.moment_dir = m / n;
    return out;
}

namespace {

// Moment directions are solved as azimuth/inclination of a unit vector in a
// per-dipole frame rotated so the warm start sits at the equator; this keeps
// the parametrization away from its poles for any warm start.
struct MomentChart {
    Mat3 world_from_chart;

    explicit MomentChart(const Vec3& init_dir) {
        world_from_chart =
            Eigen::Quaterniond::FromTwoVectors(Vec3::UnitX(), init_dir).toRotationMatrix();
    }
    Vec3 direction(double azimuth, double inclination) const {
        const Vec3 chart(std::sin(inclination) * std::cos(azimuth),
                         std::sin(inclination) * std::sin(azimuth), std::cos(inclination));
        return world_from_chart * chart;
    }
    // columns: d(direction)/d(azimuth), d(direction)/d(inclination)
    Eigen::Matrix<double, 3, 2> direction_jacobian(double azimuth, double inclination) const {
        Eigen::Matrix<double, 3, 2> j;
        j.col(0) = Vec3(-std::sin(inclination) * std::sin(azimuth),
                        std::sin(inclination) * std::cos(azimuth), 0.0);
        j.col(1) = Vec3(std::cos(inclination) * std::cos(azimuth),
                        std::cos(inclination) * std::sin(azimuth), -std::sin(inclination));
        return world_from_chart * j;
    }
};

// b = F(r) * m_dir with F the dipole kernel; returns F and (optionally) the
// derivative of b with respect to the source position.
Mat3 dipole_kernel(const Vec3& source_pos, double mag, const Vec3& point) {
    const Vec3 r = point - source_pos;
    const double d2 = r.squaredNorm();
    const double d = std::sqrt(d2);
    const double k = magnetics::kMu0 * mag / (4.0 * kPi * d2 * d2 * d);
    return k * (3.0 * r * r.transpose() - d2 * Mat3::Identity());
}

}  // namespace

MotEstimate solve_mot(std::span<const FieldSample> samples, double actuator_mag,
                      double capsule_mag, const MotEstimate& init, const MotOptions& opts) {
    const int n_samples = static_cast<int>(samples.size());
    if (n_samples < 4) {
        throw ValidationError("two-dipole fit needs at least 4 tri-axial samples");
    }
    const int n_res = 3 * n_samples;

    const MomentChart chart_a(unit(init.actuator.moment_dir));
    const MomentChart chart_c(unit(init.capsule.moment_dir));

    Eigen::VectorXd x0(10);
    x0.segment<3>(0) = init.actuator.position;
    x0(3) = 0.0;
    x0(4) = kPi / 2.0;
    x0.segment<3>(5) = init.capsule.position;
    x0(8) = 0.0;
    x0(9) = kPi / 2.0;

    const auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                              Eigen::MatrixXd* jac) {
        const Vec3 pa = x.segment<3>(0);
        const Vec3 pc = x.segment<3>(5);
        const Vec3 ma = chart_a.direction(x(3), x(4));
        const Vec3 mc = chart_c.direction(x(8), x(9));
        const DipoleSource src_a{pa, ma, actuator_mag};
        const DipoleSource src_c{pc, mc, capsule_mag};
        for (int i = 0; i < n_samples; ++i) {
            const Vec3& p = samples[i].position;
            if ((p - pa).norm() <= magnetics::kMinSeparation ||
                (p - pc).norm() <= magnetics::kMinSeparation) {
                // trial step landed on a sensor; poison the step so it is rejected
                r.segment<3>(3 * i).setConstant(1e6);
                if (jac) jac->block(3 * i, 0, 3, 10).setZero();
                continue;
            }
            r.segment<3>(3 * i) =
                magnetics::dipole_field(src_a, p) + magnetics::dipole_field(src_c, p) -
                samples[i].field;
            if (jac) {
                jac->block<3, 3>(3 * i, 0) = -magnetics::dipole_field_gradient(src_a, p);
                jac->block<3, 2>(3 * i, 3) =
                    dipole_kernel(pa, actuator_mag, p) * chart_a.direction_jacobian(x(3), x(4));
                jac->block<3, 3>(3 * i, 5) = -magnetics::dipole_field_gradient(src_c, p);
                jac->block<3, 2>(3 * i, 8) =
                    dipole_kernel(pc, capsule_mag, p) * chart_c.direction_jacobian(x(8), x(9));
            }
        }
    };

    LevMarOptions lm = opts.levmar;
    if (lm.max_step == 0.0) lm.max_step = 0.1;  // keep trial steps inside the warm-start basin
    const LevMarResult fit = levenberg_marquardt(residual, x0, n_res, lm);

    MotEstimate out;
    out.actuator.position = fit.x.segment<3>(0);
    out.actuator.moment_dir = chart_a.direction(fit.x(3), fit.x(4));
    out.capsule.position = fit.x.segment<3>(5);
    out.capsule.moment_dir = chart_c.direction(fit.x(8), fit.x(9));
    out.residual_norm = fit.residual_norm;
    out.converged = fit.converged;
    out.iterations = fit.iterations;
    out.degenerate =
        (out.actuator.position - out.capsule.position).norm() < opts.degenerate_separation;
    return out;
}

MomentBuffer::MomentBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 3) throw ValidationError("moment buffer needs capacity >= 3");
}

void MomentBuffer::push(double time, const Pose5D& pose) {
    if (!entries_.empty() && time < entries_.back().time) {
        throw ValidationError("moment buffer entries must be time-ordered");
    }
    entries_.push_back({time, pose});
    if (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
}

std::vector<Vec3> MomentBuffer::moments() const {
    std::vector<Vec3> m;
    m.reserve(entries_.size());
    for (const auto& e : entries_) m.push_back(e.pose.moment_dir);
    return m;
}

Vec3 nvf_heading(const MomentBuffer& buffer, const Vec3& prev_heading) {
    if (!buffer.full()) throw ValidationError("heading fit requires a full moment buffer");
    Mat3 scatter = Mat3::Zero();
    for (const auto& m : buffer.moments()) scatter += m * m.transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    const Vec3 evals = eig.eigenvalues();  // ascending
    if (evals(1) - evals(0) < 1e-12) {
        throw DegenerateGeometryError("moment spread leaves the rotation plane unresolved");
    }
    Vec3 normal = eig.eigenvectors().col(0);
    if (normal.dot(prev_heading) < 0.0) normal = -normal;
    return normal;
}

Tracker::Tracker(const TrackerConfig& config, const sensors::SensorGrid& grid,
                 const Pose6D& capsule, const Pose5D& actuator, double actuator_mag,
                 double capsule_mag)
    : config_(config),
      grid_(grid),
      actuator_mag_(actuator_mag),
      capsule_mag_(capsule_mag),
      buffer_(config.buffer_length) {
    grid_.validate();
    mot_.actuator = actuator;
    mot_.capsule = {capsule.position, capsule.moment_dir};
    last_.pose = orthogonalized(capsule);
    last_.mot = mot_;
}

const TrackerStep& Tracker::step(double time, const MeasureFn& measure) {
    const Vec2 xy(last_.pose.position.x(), last_.pose.position.y());
    const auto center = sensors::select_subarray_center(xy, grid_);
    const auto active = sensors::activate(center, grid_);
    const auto samples = measure(active);

    MotEstimate warm = mot_;
    warm.capsule.moment_dir = last_.pose.moment_dir;
    const MotEstimate fit =
        solve_mot(samples, actuator_mag_, capsule_mag_, warm, config_.mot);

    TrackerStep step;
    step.mot = fit;
    if (!fit.converged) {
        // keep the previous pose; the loop continues on the last valid estimate
        step.pose = last_.pose;
        step.solver_failed = true;
        last_ = step;
        return last_;
    }
    mot_ = fit;

    const bool was_full = buffer_.full();
    double sweep = 0.0;
    if (was_full) {
        sweep = angle_between(buffer_.oldest().moment_dir, buffer_.newest().moment_dir);
    }
    buffer_.push(time, fit.capsule);

    Vec3 heading = last_.pose.heading;
    if (was_full && sweep >= config_.min_sweep) {
        try {
            heading = nvf_heading(buffer_, last_.pose.heading);
            step.heading_updated = true;
        } catch (const DegenerateGeometryError&) {
            step.heading_updated = false;
        }
    }

    step.pose = orthogonalized({fit.capsule.position, fit.capsule.moment_dir, heading});
    last_ = step;
    return last_;
}

}  // namespace smal::localization
