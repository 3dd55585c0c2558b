#pragma once

#include <Eigen/Dense>

namespace alba {

/// Sample correlation matrix of the columns. Throws ZeroVariance on a constant
/// column.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data);

/// Kaiser-Meyer-Olkin sampling adequacy: sum r^2 / (sum r^2 + sum p^2) over the
/// off-diagonal correlations r and anti-image partial correlations p.
/// Requires n > J; a singular correlation matrix throws SingularCorrelation.
double kmo(const Eigen::MatrixXd& data);

/// Same statistic from an explicit inverse of a given correlation matrix.
double kmo_from_correlation(const Eigen::MatrixXd& r);

struct SphericityTest {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

/// -(n - 1 - (2J + 5) / 6) ln det R against chi-square with J(J-1)/2 dof.
SphericityTest bartlett_sphericity(const Eigen::MatrixXd& data);
SphericityTest bartlett_from_correlation(const Eigen::MatrixXd& r, int n);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, double dof);

} // namespace alba
