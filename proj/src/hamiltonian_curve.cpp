#include "bifurc/hamiltonian_curve.hpp"

#include <cmath>

namespace bifurc {

namespace {

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

void require_symmetric_square(const Mat& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0)
        throw ContractError(std::string(who) + ": matrices must be square with even size");
}

Mat builtin_O4(double t) {
    Mat a(4, 4);
    const double c = 0.3 * std::cos(t);
    a << 1, c, 0, 0,
         c, 2, 0, 0,
         0, 0, 1, c,
         0, 0, c, 2;
    return a;
}

}  // namespace

HamiltonianCurve HamiltonianCurve::constant(const Mat& a) {
    require_symmetric_square(a, "HamiltonianCurve::constant");
    HamiltonianCurve c;
    c.kind_ = CurveKind::Constant;
    c.dim_ = static_cast<int>(a.rows());
    c.payload_ = {symmetrized(a)};
    return c;
}

HamiltonianCurve HamiltonianCurve::polynomial(std::vector<Mat> coeffs) {
    if (coeffs.empty()) throw ContractError("HamiltonianCurve::polynomial: no coefficients");
    for (auto& m : coeffs) {
        require_symmetric_square(m, "HamiltonianCurve::polynomial");
        m = symmetrized(m);
    }
    HamiltonianCurve c;
    c.kind_ = CurveKind::Polynomial;
    c.dim_ = static_cast<int>(coeffs.front().rows());
    c.payload_ = std::move(coeffs);
    return c;
}

HamiltonianCurve HamiltonianCurve::bernstein(std::vector<Mat> control) {
    if (control.empty()) throw ContractError("HamiltonianCurve::bernstein: no control matrices");
    for (auto& m : control) {
        require_symmetric_square(m, "HamiltonianCurve::bernstein");
        m = symmetrized(m);
    }
    HamiltonianCurve c;
    c.kind_ = CurveKind::Bernstein;
    c.dim_ = static_cast<int>(control.front().rows());
    c.payload_ = std::move(control);
    return c;
}

HamiltonianCurve HamiltonianCurve::samples(std::vector<double> times, std::vector<Mat> values,
                                           std::optional<double> period) {
    if (times.size() != values.size() || times.size() < 2)
        throw ContractError("HamiltonianCurve::samples: need matching times/values, at least two");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw ContractError("HamiltonianCurve::samples: times must be strictly increasing");
    for (auto& m : values) {
        require_symmetric_square(m, "HamiltonianCurve::samples");
        m = symmetrized(m);
    }
    HamiltonianCurve c;
    c.kind_ = CurveKind::Samples;
    c.dim_ = static_cast<int>(values.front().rows());
    c.payload_ = std::move(values);
    c.times_ = std::move(times);
    if (period) c.set_period(*period);
    return c;
}

HamiltonianCurve HamiltonianCurve::builtin(const std::string& name) {
    HamiltonianCurve c;
    c.kind_ = CurveKind::Builtin;
    c.builtin_name_ = name;
    if (name == "O1-shear" || name == "O2-rotation") {
        c.dim_ = 2;
        c.fn_ = [](double) { return Mat::Identity(2, 2); };
    } else if (name == "O3-oscillators") {
        c.dim_ = 4;
        c.fn_ = [](double) {
            Vec d(4);
            d << 1, 2, 1, 2;
            return Mat(d.asDiagonal());
        };
    } else if (name == "O4-coupled") {
        c.dim_ = 4;
        c.fn_ = builtin_O4;
        c.period_ = 2.0 * M_PI;
    } else {
        throw ContractError("unknown builtin curve: " + name);
    }
    return c;
}

HamiltonianCurve HamiltonianCurve::with_direction(HamiltonianCurve dir) const {
    if (dir.dim() != dim_) throw ContractError("with_direction: dimension mismatch");
    HamiltonianCurve c = *this;
    c.direction_ = std::make_shared<HamiltonianCurve>(std::move(dir));
    return c;
}

void HamiltonianCurve::set_period(double T) {
    if (!(T > 0)) throw ContractError("set_period: period must be positive");
    period_ = T;
}

void HamiltonianCurve::require_in_domain(double t) const {
    if (!std::isfinite(t)) throw ContractError("curve evaluation at non-finite t");
    if (kind_ == CurveKind::Bernstein && (t < -1.0 || t > 1.0))
        throw ContractError("Bernstein curve evaluated outside [-1, 1]");
    if (kind_ == CurveKind::Samples && !period_) {
        if (t < times_.front() || t > times_.back())
            throw ContractError("sample curve evaluated outside its node span");
    }
}

Mat HamiltonianCurve::evaluate_raw(double t) const {
    switch (kind_) {
        case CurveKind::Constant:
            return payload_.front();
        case CurveKind::Polynomial: {
            // Horner in t
            Mat acc = payload_.back();
            for (int k = static_cast<int>(payload_.size()) - 2; k >= 0; --k)
                acc = payload_[static_cast<size_t>(k)] + t * acc;
            return acc;
        }
        case CurveKind::Bernstein: {
            // de Casteljau on [-1, 1]
            const double u = 0.5 * (1.0 - t), v = 0.5 * (1.0 + t);
            std::vector<Mat> layer = payload_;
            for (size_t len = layer.size(); len > 1; --len)
                for (size_t i = 0; i + 1 < len; ++i) layer[i] = u * layer[i] + v * layer[i + 1];
            return layer.front();
        }
        case CurveKind::Samples: {
            double x = t;
            if (period_) {
                const double T = *period_;
                x = times_.front() + std::fmod(std::fmod(t - times_.front(), T) + T, T);
            }
            // locate interval
            size_t hi = 1;
            while (hi + 1 < times_.size() && times_[hi] < x) ++hi;
            const size_t lo = hi - 1;
            const double h = times_[hi] - times_[lo];
            const double s = (x - times_[lo]) / h;
            if (s == 0.0) return payload_[lo];
            if (s == 1.0) return payload_[hi];
            // cubic Hermite with finite-difference slopes (C^1)
            auto slope = [&](size_t i) -> Mat {
                auto value = [&](size_t j) { return payload_[j]; };
                if (i == 0) return (value(1) - value(0)) / (times_[1] - times_[0]);
                if (i + 1 == times_.size())
                    return (value(i) - value(i - 1)) / (times_[i] - times_[i - 1]);
                return (value(i + 1) - value(i - 1)) / (times_[i + 1] - times_[i - 1]);
            };
            const Mat m0 = slope(lo) * h, m1 = slope(hi) * h;
            const double s2 = s * s, s3 = s2 * s;
            return (2 * s3 - 3 * s2 + 1) * payload_[lo] + (s3 - 2 * s2 + s) * m0 +
                   (-2 * s3 + 3 * s2) * payload_[hi] + (s3 - s2) * m1;
        }
        case CurveKind::Builtin:
            return fn_(t);
    }
    throw ContractError("unreachable curve kind");
}

Mat HamiltonianCurve::evaluate(double t) const {
    require_in_domain(t);
    return symmetrized(evaluate_raw(t));
}

Mat HamiltonianCurve::evaluate(double t, double eps) const {
    Mat a = evaluate(t);
    if (direction_) a += eps * direction_->evaluate(t);
    return a;
}

Mat HamiltonianCurve::eps_derivative(double t) const {
    if (!direction_) return Mat::Zero(dim_, dim_);
    return direction_->evaluate(t);
}

SymplecticMatrix builtin_initial(const std::string& name) {
    if (name == "O1-shear") {
        Mat g(2, 2);
        g << 1, 1, 0, 1;
        return SymplecticMatrix::checked(g);
    }
    if (name == "O2-rotation") return SymplecticMatrix::checked(Mat::Identity(2, 2));
    if (name == "O3-oscillators" || name == "O4-coupled")
        return SymplecticMatrix::checked(Mat::Identity(4, 4));
    throw ContractError("unknown builtin curve: " + name);
}

HamiltonianCurve bernstein_approximant(const HamiltonianCurve& curve, int M) {
    if (M < 1) throw ContractError("bernstein_approximant: M must be >= 1");
    // Control values A(k/M), k = -M..M, give exactly the degree-2M
    // Bernstein form on [-1, 1].
    std::vector<Mat> control;
    control.reserve(static_cast<size_t>(2 * M + 1));
    for (int k = -M; k <= M; ++k)
        control.push_back(curve.evaluate(static_cast<double>(k) / static_cast<double>(M)));
    return HamiltonianCurve::bernstein(std::move(control));
}

}  // namespace bifurc
