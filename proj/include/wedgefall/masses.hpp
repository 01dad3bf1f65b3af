#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "wedgefall/errors.hpp"

namespace wedgefall {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class MassModel {
public:
    MassModel(double m1, double m2, double m3, double tol_special = 1e-12)
        : m_{m1, m2, m3}, tol_special_(tol_special)
    {
        if (!(m1 > m2 && m2 >= m3 && m3 > 0.0) || !std::isfinite(m1))
            throw InvalidMass("masses must satisfy m1 > m2 >= m3 > 0, got (" + std::to_string(m1) + ", " +
                              std::to_string(m2) + ", " + std::to_string(m3) + ")");
        gamma_[0] = (m1 - m2) / (m1 + m2);
        gamma_[1] = (m2 - m3) / (m2 + m3);
        partial_[2] = m3;
        partial_[1] = m2 + m3;
        partial_[0] = m1 + m2 + m3;
        const double rhs = std::sqrt(m1 + m2) * std::sqrt(m2 + m3);
        special_ = std::abs(2.0 * std::sqrt(m1 * m3) - rhs) <= tol_special_ * rhs;
    }

    // 0-based accessors
    double m(int i) const { return m_[i]; }
    double gamma(int i) const { return gamma_[i]; }
    // M_i = m_i + ... + m_3
    double partial(int i) const { return partial_[i]; }
    double total() const { return partial_[0]; }
    bool special() const { return special_; }
    double tol_special() const { return tol_special_; }

    Vec3 vec() const { return {m_[0], m_[1], m_[2]}; }
    Vec3 sqrt_vec() const { return {std::sqrt(m_[0]), std::sqrt(m_[1]), std::sqrt(m_[2])}; }

    std::string str() const
    {
        return "(" + std::to_string(m_[0]) + ", " + std::to_string(m_[1]) + ", " + std::to_string(m_[2]) + ")";
    }

private:
    std::array<double, 3> m_;
    std::array<double, 2> gamma_{};
    std::array<double, 3> partial_{};
    double tol_special_;
    bool special_ = false;
};

inline std::pair<double, double> gamma(const MassModel& masses)
{
    return {masses.gamma(0), masses.gamma(1)};
}

// Solves 2 sqrt(m1 m3) = sqrt(m1+m2) sqrt(m2+m3) for m3.
inline double special_mass_solve(double m1, double m2)
{
    if (!(m1 > m2) || !(3.0 * m1 > m2) || !(m2 > 0.0))
        throw InvalidMass("special_mass_solve needs m1 > m2 > 0 and 3 m1 > m2");
    const double m3 = m2 * (m1 + m2) / (3.0 * m1 - m2);
    if (!(m3 > 0.0) || m3 > m2)
        throw InvalidMass("special mass solution m3 = " + std::to_string(m3) + " violates m2 >= m3 > 0");
    return m3;
}

inline MassModel special_masses(double m1, double m2)
{
    return MassModel(m1, m2, special_mass_solve(m1, m2));
}

} // namespace wedgefall
