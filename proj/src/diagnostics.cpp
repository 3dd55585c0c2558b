#include "alba/diagnostics.hpp"

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "alba/error.hpp"

namespace alba {

namespace {

void check_shape(const Eigen::MatrixXd& data)
{
    if (data.cols() < 2)
        throw Error(Errc::InvalidArgument, "need at least two columns");
    if (data.rows() <= data.cols())
        throw Error(Errc::InvalidArgument, "need more rows than columns");
}

} // namespace

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data)
{
    const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    const Eigen::VectorXd sd = centered.colwise().norm();
    for (Eigen::Index j = 0; j < sd.size(); ++j)
        if (!(sd(j) > 0.0))
            throw Error(Errc::ZeroVariance, "column " + std::to_string(j + 1) + " is constant");
    const Eigen::MatrixXd z = centered * sd.cwiseInverse().asDiagonal();
    Eigen::MatrixXd r = z.transpose() * z;
    r.diagonal().setOnes();
    return r;
}

double kmo_from_correlation(const Eigen::MatrixXd& r)
{
    Eigen::FullPivLU<Eigen::MatrixXd> lu(r);
    if (!lu.isInvertible())
        throw Error(Errc::SingularCorrelation, "correlation matrix is singular");
    const Eigen::MatrixXd inv = lu.inverse();
    double r2 = 0.0, p2 = 0.0;
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            if (i == j)
                continue;
            const double p = -inv(i, j) / std::sqrt(inv(i, i) * inv(j, j));
            r2 += r(i, j) * r(i, j);
            p2 += p * p;
        }
    if (!(r2 + p2 > 0.0))
        return 0.0;
    return r2 / (r2 + p2);
}

double kmo(const Eigen::MatrixXd& data)
{
    check_shape(data);
    return kmo_from_correlation(correlation_matrix(data));
}

double chi_square_sf(double x, double dof)
{
    if (x <= 0.0)
        return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

SphericityTest bartlett_from_correlation(const Eigen::MatrixXd& r, int n)
{
    const auto j = static_cast<int>(r.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success)
        throw Error(Errc::SingularCorrelation, "correlation matrix is not positive definite");
    const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
    if ((diag.array() <= 0.0).any())
        throw Error(Errc::SingularCorrelation, "correlation matrix is singular");
    const double log_det = 2.0 * diag.array().log().sum();
    SphericityTest t;
    t.dof = j * (j - 1) / 2;
    t.statistic = -(static_cast<double>(n) - 1.0 - (2.0 * j + 5.0) / 6.0) * log_det;
    t.p_value = chi_square_sf(t.statistic, t.dof);
    return t;
}

SphericityTest bartlett_sphericity(const Eigen::MatrixXd& data)
{
    check_shape(data);
    return bartlett_from_correlation(correlation_matrix(data), static_cast<int>(data.rows()));
}

} // namespace alba
