#include <qbmor/reduction_baselines.hpp>

namespace qbmor {

BalancedTruncation balanced_truncation(const QBSystem& sys, Index r, double gamma) {
  require(r >= 1 && r <= sys.n(), ErrorCode::InvalidArgument, "balanced_truncation: 1 <= r <= n required");
  const GramianBundle g = truncated_gramians(gamma == 1.0 ? sys : rescale(sys, gamma));
  const Mat LP = psd_factor(g.PT);
  const Mat LQ = psd_factor(g.QT);
  BalancedTruncation bt;
  if (LP.cols() == 0 || LQ.cols() == 0) {
    bt.hsv = Vec::Zero(sys.n());
    throw Error(ErrorCode::RankDeficient, "a truncated Gramian vanishes");
  }
  Eigen::JacobiSVD<Mat> svd(LQ.transpose() * LP, Eigen::ComputeThinU | Eigen::ComputeThinV);
  bt.hsv = Vec::Zero(sys.n());
  bt.hsv.head(svd.singularValues().size()) = svd.singularValues();
  const Vec& s = svd.singularValues();
  if (s.size() < r || !(s[r - 1] >= 1e-14 * s[0]))
    throw Error(ErrorCode::RankDeficient, "fewer than r numerically nonzero singular values");
  const Vec isq = s.head(r).array().rsqrt();
  bt.V = LP * svd.matrixV().leftCols(r) * isq.asDiagonal();
  bt.W = LQ * svd.matrixU().leftCols(r) * isq.asDiagonal();
  bt.red = project(sys, bt.V, bt.W);
  bt.red.meta = sys.meta;
  bt.red.meta["method"] = "bt";
  return bt;
}

}  // namespace qbmor
