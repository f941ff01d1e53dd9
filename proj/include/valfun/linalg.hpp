#ifndef VALFUN_LINALG_HPP
#define VALFUN_LINALG_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace valfun {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Tolerances {
  double act = 1e-7;        // activity / zero-multiplier band
  double kkt = 1e-8;        // KKT residual
  double rank = 1e-9;       // singular values below this count as zero
  double dedup = 1e-6;      // minimizer dedup radius
  double singleton = 1e-6;  // candidates within this radius coincide
  int branch_cap = 8;       // max |theta| for M-type branch enumeration
  bool rational = false;    // exact arithmetic for LP-path vertex work
};

// Numerical rank of M from its singular values.
int numeric_rank(const Mat& M, double tol);

// Orthonormal basis of ker(M), one column per null direction.
Mat null_space(const Mat& M, double tol);

// 2-norm condition number; infinity for singular input.
double condition_number(const Mat& M);

Mat vstack(const Mat& top, const Mat& bottom);
Mat hstack(const Mat& left, const Mat& right);
Vec concat(const Vec& a, const Vec& b);

Vec select_rows(const Vec& v, const std::vector<int>& idx);
Mat select_rows(const Mat& M, const std::vector<int>& idx);

Vec to_vec(const std::vector<double>& v);
std::vector<double> to_std(const Vec& v);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
std::string format_vec(const Vec& v);

// Lexicographic comparison with an absolute tolerance per coordinate.
bool lex_less(const Vec& a, const Vec& b, double tol = 0.0);

}  // namespace valfun

#endif
