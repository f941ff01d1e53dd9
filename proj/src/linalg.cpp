#include "valfun/linalg.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace valfun {

int numeric_rank(const Mat& M, double tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(M);
  const Vec& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++r;
  return r;
}

Mat null_space(const Mat& M, double tol) {
  const Eigen::Index n = M.cols();
  if (M.rows() == 0) return Mat::Identity(n, n);
  if (n == 0) return Mat(0, 0);
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++r;
  return svd.matrixV().rightCols(n - r);
}

double condition_number(const Mat& M) {
  if (M.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(M);
  const Vec& s = svd.singularValues();
  double lo = s(s.size() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / lo;
}

Mat vstack(const Mat& top, const Mat& bottom) {
  if (top.rows() == 0) return bottom;
  if (bottom.rows() == 0) return top;
  Mat out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

Mat hstack(const Mat& left, const Mat& right) {
  if (left.cols() == 0) return right;
  if (right.cols() == 0) return left;
  Mat out(left.rows(), left.cols() + right.cols());
  out << left, right;
  return out;
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

Vec select_rows(const Vec& v, const std::vector<int>& idx) {
  Vec out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out(k) = v(idx[k]);
  return out;
}

Mat select_rows(const Mat& M, const std::vector<int>& idx) {
  Mat out(idx.size(), M.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(k) = M.row(idx[k]);
  return out;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_vec(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v(i));
  }
  return s + ")";
}

bool lex_less(const Vec& a, const Vec& b, double tol) {
  for (Eigen::Index i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a(i) < b(i) - tol) return true;
    if (a(i) > b(i) + tol) return false;
  }
  return a.size() < b.size();
}

}  // namespace valfun
