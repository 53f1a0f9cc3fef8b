#include "cpqbm/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace cpqbm {

Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
  // Eigen stores column-major, so the reshape is a straight copy.
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int dim) {
  if (v.size() != Eigen::Index(dim) * dim)
    throw std::invalid_argument("unvec: length is not dim^2");
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim);
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m) {
  return 0.5 * (m + m.adjoint());
}

double hermiticity_defect(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint().eval()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("expm: matrix must be square");
  const Eigen::Index n = a.rows();
  if (!a.allFinite()) throw std::invalid_argument("expm: non-finite input");

  // Order-13 diagonal Pade coefficients.
  static const double b[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const double theta13 = 5.371920351148152;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  const Eigen::MatrixXcd as = a / std::pow(2.0, squarings);

  const Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd a2 = as * as;
  const Eigen::MatrixXcd a4 = a2 * a2;
  const Eigen::MatrixXcd a6 = a2 * a4;

  const Eigen::MatrixXcd u =
      as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
            b[5] * a4 + b[3] * a2 + b[1] * ident);
  const Eigen::MatrixXcd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                             b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

  Eigen::MatrixXcd f = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) f = f * f;
  return f;
}

}  // namespace cpqbm
