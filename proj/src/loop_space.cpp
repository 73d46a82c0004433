#include "nsq/loop_space.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace nsq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_dim(const FourierLoop& x, const FourierLoop& y) {
    if (x.pairs() != y.pairs())
        throw DimensionError("loops live in different ambient spaces: d=" +
                             std::to_string(x.pairs()) + " vs d=" + std::to_string(y.pairs()));
}

// cos/sin tables for angles 2 pi k j / M, rows j, columns k+K
void trig_tables(int M, int K, Mat& C, Mat& S) {
    Vec c(M), s(M);
    for (int m = 0; m < M; ++m) {
        c[m] = std::cos(kTwoPi * m / M);
        s[m] = std::sin(kTwoPi * m / M);
    }
    C.resize(M, 2 * K + 1);
    S.resize(M, 2 * K + 1);
    for (int j = 0; j < M; ++j) {
        for (int k = -K; k <= K; ++k) {
            long long idx = (static_cast<long long>(k) * j) % M;
            if (idx < 0) idx += M;
            C(j, k + K) = c[idx];
            S(j, k + K) = s[idx];
        }
    }
}

}  // namespace

SymplecticSpace::SymplecticSpace(int d) : d_(d) {
    if (d < 1) throw DimensionError("ambient pair count must be >= 1");
}

Mat SymplecticSpace::J() const {
    Mat J = Mat::Zero(dim(), dim());
    for (int i = 0; i < d_; ++i) {
        J(2 * i + 1, 2 * i) = 1.0;
        J(2 * i, 2 * i + 1) = -1.0;
    }
    return J;
}

Vec apply_J(const Vec& v) {
    Vec out(v.size());
    for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) {
        out[i] = -v[i + 1];
        out[i + 1] = v[i];
    }
    return out;
}

Mat apply_J(const Mat& v) {
    Mat out(v.rows(), v.cols());
    for (Eigen::Index i = 0; i + 1 < v.rows(); i += 2) {
        out.row(i) = -v.row(i + 1);
        out.row(i + 1) = v.row(i);
    }
    return out;
}

Vec rotate(const Vec& v, double theta) {
    return std::cos(theta) * v + std::sin(theta) * apply_J(v);
}

Mat rotation_matrix(int d, double theta) {
    SymplecticSpace sp(d);
    return std::cos(theta) * Mat::Identity(sp.dim(), sp.dim()) + std::sin(theta) * sp.J();
}

FourierLoop::FourierLoop(int d, int K) : d_(d), K_(K), c_(Mat::Zero(2 * d, 2 * K + 1)) {
    if (d < 1) throw DimensionError("ambient pair count must be >= 1");
    if (K < 0) throw DomainError("truncation order must be >= 0");
}

FourierLoop::FourierLoop(int d, int K, Mat coeffs) : FourierLoop(d, K) {
    if (coeffs.rows() != 2 * d || coeffs.cols() != 2 * K + 1)
        throw DimensionError("coefficient block has wrong shape");
    c_ = std::move(coeffs);
}

FourierLoop FourierLoop::constant(const Vec& v, int K) {
    if (v.size() % 2 != 0 || v.size() == 0) throw DimensionError("phase-space vector must have even size");
    FourierLoop x(static_cast<int>(v.size() / 2), K);
    x.coeff(0) = v;
    return x;
}

Vec FourierLoop::eval(double t) const {
    Vec cs = Vec::Zero(dim());
    Vec sn = Vec::Zero(dim());
    for (int k = -K_; k <= K_; ++k) {
        const double th = kTwoPi * k * t;
        cs += std::cos(th) * coeff(k);
        sn += std::sin(th) * coeff(k);
    }
    return cs + apply_J(sn);
}

FourierLoop FourierLoop::with_order(int K2) const {
    FourierLoop y(d_, K2);
    const int kk = std::min(K_, K2);
    for (int k = -kk; k <= kk; ++k) y.coeff(k) = coeff(k);
    return y;
}

FourierLoop& FourierLoop::operator+=(const FourierLoop& o) {
    require_same_dim(*this, o);
    if (o.K_ > K_) *this = with_order(o.K_);
    for (int k = -o.K_; k <= o.K_; ++k) coeff(k) += o.coeff(k);
    return *this;
}

FourierLoop& FourierLoop::operator-=(const FourierLoop& o) {
    require_same_dim(*this, o);
    if (o.K_ > K_) *this = with_order(o.K_);
    for (int k = -o.K_; k <= o.K_; ++k) coeff(k) -= o.coeff(k);
    return *this;
}

FourierLoop& FourierLoop::operator*=(double a) {
    c_ *= a;
    return *this;
}

FourierLoop operator+(FourierLoop a, const FourierLoop& b) { return a += b; }
FourierLoop operator-(FourierLoop a, const FourierLoop& b) { return a -= b; }
FourierLoop operator*(double s, FourierLoop a) { return a *= s; }
FourierLoop operator*(FourierLoop a, double s) { return a *= s; }

double hs_inner(const FourierLoop& x, const FourierLoop& y, double s) {
    require_same_dim(x, y);
    const int K = std::min(x.order(), y.order());
    double acc = 0.0;
    for (int k = -K; k <= K; ++k) {
        if (k == 0) continue;
        acc += std::pow(std::abs(k), 2.0 * s) * x.coeff(k).dot(y.coeff(k));
    }
    return x.coeff(0).dot(y.coeff(0)) + kTwoPi * acc;
}

double hs_norm(const FourierLoop& x, double s) { return std::sqrt(std::max(0.0, hs_inner(x, x, s))); }

double l2_inner(const FourierLoop& x, const FourierLoop& y) {
    require_same_dim(x, y);
    const int K = std::min(x.order(), y.order());
    double acc = 0.0;
    for (int k = -K; k <= K; ++k) acc += x.coeff(k).dot(y.coeff(k));
    return acc;
}

double l2_norm(const FourierLoop& x) { return std::sqrt(l2_inner(x, x)); }

double slobodeckij_seminorm(const FourierLoop& x, double s, int M) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("Slobodeckij order must lie in (0,1)");
    if (M < 2 * x.order() + 1) throw AliasingError("grid too coarse for the loop");
    Mat pts(x.dim(), M);
    for (int j = 0; j < M; ++j) pts.col(j) = x.eval((j + 0.5) / M);
    const double band = 1.0 / M;
    double acc = 0.0;
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            double dist = std::abs(i - j) / static_cast<double>(M);
            dist = std::min(dist, 1.0 - dist);
            if (dist < band - 1e-15) continue;
            acc += (pts.col(i) - pts.col(j)).squaredNorm() / std::pow(dist, 1.0 + 2.0 * s);
        }
    }
    return std::sqrt(acc / (static_cast<double>(M) * M));
}

FourierLoop project(const FourierLoop& x, Part part) {
    FourierLoop y(x.pairs(), x.order());
    for (int k = -x.order(); k <= x.order(); ++k) {
        const bool keep = (part == Part::Plus && k > 0) || (part == Part::Zero && k == 0) ||
                          (part == Part::Minus && k < 0);
        if (keep) y.coeff(k) = x.coeff(k);
    }
    return y;
}

FourierLoop project_mode(const FourierLoop& x, int k) {
    FourierLoop y(x.pairs(), x.order());
    if (std::abs(k) <= x.order()) y.coeff(k) = x.coeff(k);
    return y;
}

FourierLoop project_ambient(const FourierLoop& x, int n) {
    if (n > x.pairs() || n < 0) throw DimensionError("ambient projection index exceeds pair count");
    FourierLoop y = x;
    y.coeffs().bottomRows(2 * (x.pairs() - n)).setZero();
    return y;
}

Vec project_ambient(const Vec& v, int n) {
    if (2 * n > v.size() || n < 0) throw DimensionError("ambient projection index exceeds pair count");
    Vec out = v;
    out.tail(v.size() - 2 * n).setZero();
    return out;
}

FourierLoop t_star(const FourierLoop& y, double s) {
    FourierLoop out = y;
    for (int k = -y.order(); k <= y.order(); ++k) {
        if (k == 0) continue;
        out.coeff(k) /= kTwoPi * std::pow(std::abs(k), 2.0 * s);
    }
    return out;
}

GridSamples sample(const FourierLoop& x, int M) {
    if (M < 1) throw DomainError("sample count must be positive");
    Mat C, S;
    trig_tables(M, x.order(), C, S);
    GridSamples g;
    g.M = M;
    g.values = x.coeffs() * C.transpose() + apply_J(Mat(x.coeffs() * S.transpose()));
    return g;
}

FourierLoop analyze(const GridSamples& g, int K) {
    if (g.M < 2 * K + 1)
        throw AliasingError("analyze needs M >= 2K+1 (M=" + std::to_string(g.M) + ", K=" + std::to_string(K) + ")");
    if (g.values.rows() % 2 != 0) throw DimensionError("samples must be phase-space vectors");
    Mat C, S;
    trig_tables(g.M, K, C, S);
    Mat coeffs = (g.values * C - apply_J(Mat(g.values * S))) / static_cast<double>(g.M);
    return FourierLoop(static_cast<int>(g.values.rows() / 2), K, std::move(coeffs));
}

FourierLoop e_plus(int d, int K) {
    if (K < 1) throw DomainError("e_plus needs K >= 1");
    FourierLoop x(d, K);
    x.coeff(1)[0] = 1.0 / std::sqrt(kTwoPi);
    return x;
}

FourierLoop derivative(const FourierLoop& x) {
    FourierLoop out(x.pairs(), x.order());
    for (int k = -x.order(); k <= x.order(); ++k) out.coeff(k) = kTwoPi * k * apply_J(Vec(x.coeff(k)));
    return out;
}

}  // namespace nsq
