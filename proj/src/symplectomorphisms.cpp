#include "nsq/symplectomorphisms.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "nsq/action.hpp"

namespace nsq {

std::string to_string(MapKind k) {
    switch (k) {
        case MapKind::Identity: return "identity";
        case MapKind::Rotation: return "rotation";
        case MapKind::Shear: return "shear";
        case MapKind::Linear: return "linear";
        case MapKind::FiniteDimNonlinear: return "finite_dim_nonlinear";
        case MapKind::PlaneWave: return "plane_wave";
        case MapKind::Composition: return "composition";
    }
    return "unknown";
}

namespace {

class LinearMap final : public Symplectomorphism {
public:
    LinearMap(int d, Mat A, Mat Ainv, MapKind kind) : Symplectomorphism(d), A_(std::move(A)), Ai_(std::move(Ainv)), kind_(kind) {
        Eigen::JacobiSVD<Mat> svd(A_);
        Eigen::JacobiSVD<Mat> svdi(Ai_);
        bound_d1 = std::max(svd.singularValues()[0], svdi.singularValues()[0]);
        bound_d2 = 0.0;
    }
    Vec forward(const Vec& x) const override { return A_ * x; }
    Vec inverse(const Vec& x) const override { return Ai_ * x; }
    Mat dforward(const Vec&) const override { return A_; }
    Mat dinverse(const Vec&) const override { return Ai_; }
    MapKind kind() const override { return kind_; }
    std::optional<Mat> linear_part() const override { return A_; }

private:
    Mat A_, Ai_;
    MapKind kind_;
};

class PlaneWaveMap final : public Symplectomorphism {
public:
    PlaneWaveMap(int d, double eps, Vec a) : Symplectomorphism(d), eps_(eps), a_(std::move(a)), Ja_(apply_J(a_)) {
        bound_d1 = 1.0 + std::abs(eps_) * a_.squaredNorm();
        bound_d2 = std::abs(eps_) * a_.squaredNorm() * a_.norm();
    }
    Vec forward(const Vec& x) const override { return x + eps_ * std::cos(a_.dot(x)) * Ja_; }
    Vec inverse(const Vec& x) const override { return x - eps_ * std::cos(a_.dot(x)) * Ja_; }
    Mat dforward(const Vec& x) const override {
        return Mat::Identity(x.size(), x.size()) - eps_ * std::sin(a_.dot(x)) * Ja_ * a_.transpose();
    }
    Mat dinverse(const Vec& x) const override {
        return Mat::Identity(x.size(), x.size()) + eps_ * std::sin(a_.dot(x)) * Ja_ * a_.transpose();
    }
    MapKind kind() const override { return MapKind::PlaneWave; }

private:
    double eps_;
    Vec a_, Ja_;
};

// Time-1 flow of W(y) = A (1 - |y-c|^2/w^2)^4 on R^{2 n0}.
class BumpFlowMap final : public Symplectomorphism {
public:
    BumpFlowMap(int d, BumpFlowParams p) : Symplectomorphism(d), p_(std::move(p)) {
        if (p_.n0 < 1 || p_.n0 > d) throw DimensionError("bump support pairs must satisfy 1 <= n0 <= d");
        if (p_.center.size() == 0) p_.center = Vec::Zero(2 * p_.n0);
        if (p_.center.size() != 2 * p_.n0) throw DimensionError("bump center has wrong size");
        // |Hess W| <= A (8 + 48) / w^2 on the support
        const double lip = std::abs(p_.amplitude) * 56.0 / (p_.width * p_.width);
        if (p_.steps <= 0) p_.steps = std::max(8, static_cast<int>(std::ceil(lip / 0.25)));
    }

    Vec forward(const Vec& x) const override { return run(x, 1.0, nullptr); }
    Vec inverse(const Vec& x) const override { return run(x, -1.0, nullptr); }
    Mat dforward(const Vec& x) const override {
        Mat D;
        run(x, 1.0, &D);
        return D;
    }
    Mat dinverse(const Vec& x) const override {
        Mat D;
        run(x, -1.0, &D);
        return D;
    }
    MapKind kind() const override { return MapKind::FiniteDimNonlinear; }

private:
    Vec field(const Vec& y) const {
        const Vec z = y - p_.center;
        const double w2 = p_.width * p_.width;
        const double s = z.squaredNorm() / w2;
        if (s >= 1.0) return Vec::Zero(y.size());
        const double b1 = -4.0 * std::pow(1.0 - s, 3);
        return apply_J(Vec(p_.amplitude * b1 * 2.0 / w2 * z));
    }

    Mat dfield(const Vec& y) const {
        const Vec z = y - p_.center;
        const double w2 = p_.width * p_.width;
        const double s = z.squaredNorm() / w2;
        const Eigen::Index m = y.size();
        if (s >= 1.0) return Mat::Zero(m, m);
        const double b1 = -4.0 * std::pow(1.0 - s, 3);
        const double b2 = 12.0 * (1.0 - s) * (1.0 - s);
        Mat Hs = p_.amplitude * (b2 * 4.0 / (w2 * w2) * z * z.transpose() + b1 * 2.0 / w2 * Mat::Identity(m, m));
        return apply_J(Hs);
    }

    // One Gauss-Legendre step of size h; optionally accumulates the step Jacobian.
    Vec gl_step(const Vec& y, double h, Mat* Dstep) const {
        static const double s3 = std::sqrt(3.0);
        const double A[2][2] = {{0.25, 0.25 - s3 / 6.0}, {0.25 + s3 / 6.0, 0.25}};
        const double c[2] = {0.5 - s3 / 6.0, 0.5 + s3 / 6.0};
        const Eigen::Index m = y.size();
        Vec f0 = field(y);
        Vec Y1 = y + h * c[0] * f0, Y2 = y + h * c[1] * f0;
        Mat Jac(2 * m, 2 * m);
        for (int it = 0; it < 12; ++it) {
            const Vec F1 = field(Y1), F2 = field(Y2);
            Vec G(2 * m);
            G.head(m) = Y1 - y - h * (A[0][0] * F1 + A[0][1] * F2);
            G.tail(m) = Y2 - y - h * (A[1][0] * F1 + A[1][1] * F2);
            const Mat D1 = dfield(Y1), D2 = dfield(Y2);
            Jac.setIdentity();
            Jac.topLeftCorner(m, m) -= h * A[0][0] * D1;
            Jac.topRightCorner(m, m) -= h * A[0][1] * D2;
            Jac.bottomLeftCorner(m, m) -= h * A[1][0] * D1;
            Jac.bottomRightCorner(m, m) -= h * A[1][1] * D2;
            const Vec dz = Jac.partialPivLu().solve(G);
            Y1 -= dz.head(m);
            Y2 -= dz.tail(m);
            if (dz.norm() <= 4e-16 * (1.0 + y.norm())) break;
        }
        const Vec F1 = field(Y1), F2 = field(Y2);
        if (Dstep) {
            const Mat D1 = dfield(Y1), D2 = dfield(Y2);
            Jac.setIdentity();
            Jac.topLeftCorner(m, m) -= h * A[0][0] * D1;
            Jac.topRightCorner(m, m) -= h * A[0][1] * D2;
            Jac.bottomLeftCorner(m, m) -= h * A[1][0] * D1;
            Jac.bottomRightCorner(m, m) -= h * A[1][1] * D2;
            Mat rhs(2 * m, m);
            rhs.topRows(m).setIdentity();
            rhs.bottomRows(m).setIdentity();
            const Mat dY = Jac.partialPivLu().solve(rhs);
            *Dstep = Mat::Identity(m, m) + 0.5 * h * (D1 * dY.topRows(m) + D2 * dY.bottomRows(m));
        }
        return y + 0.5 * h * (F1 + F2);
    }

    Vec run(const Vec& x, double dir, Mat* D) const {
        const Eigen::Index m = 2 * p_.n0;
        Vec y = x.head(m);
        Mat Dy = Mat::Identity(m, m);
        const double h = dir / p_.steps;
        Mat Ds;
        for (int s = 0; s < p_.steps; ++s) {
            y = gl_step(y, h, D ? &Ds : nullptr);
            if (D) Dy = Ds * Dy;
        }
        Vec out = x;
        out.head(m) = y;
        if (D) {
            *D = Mat::Identity(x.size(), x.size());
            D->topLeftCorner(m, m) = Dy;
        }
        return out;
    }

    BumpFlowParams p_;
};

class CompositionMap final : public Symplectomorphism {
public:
    explicit CompositionMap(std::vector<MapPtr> maps) : Symplectomorphism(maps.at(0)->pairs()), maps_(std::move(maps)) {
        for (const auto& m : maps_)
            if (m->pairs() != pairs()) throw DimensionError("composed maps live in different spaces");
    }
    Vec forward(const Vec& x) const override {
        Vec y = x;
        for (auto it = maps_.rbegin(); it != maps_.rend(); ++it) y = (*it)->forward(y);
        return y;
    }
    Vec inverse(const Vec& x) const override {
        Vec y = x;
        for (const auto& m : maps_) y = m->inverse(y);
        return y;
    }
    Mat dforward(const Vec& x) const override {
        Vec y = x;
        Mat D = Mat::Identity(x.size(), x.size());
        for (auto it = maps_.rbegin(); it != maps_.rend(); ++it) {
            D = (*it)->dforward(y) * D;
            y = (*it)->forward(y);
        }
        return D;
    }
    Mat dinverse(const Vec& x) const override {
        Vec y = x;
        Mat D = Mat::Identity(x.size(), x.size());
        for (const auto& m : maps_) {
            D = m->dinverse(y) * D;
            y = m->inverse(y);
        }
        return D;
    }
    MapKind kind() const override { return MapKind::Composition; }
    std::optional<Mat> linear_part() const override {
        Mat A = Mat::Identity(2 * pairs(), 2 * pairs());
        for (const auto& m : maps_) {
            auto Lm = m->linear_part();
            if (!Lm) return std::nullopt;
            A = A * *Lm;
        }
        return A;
    }

private:
    std::vector<MapPtr> maps_;
};

Vec random_in_ball(std::mt19937_64& rng, int dim, double radius) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    Vec u(dim);
    for (int i = 0; i < dim; ++i) u[i] = nd(rng);
    u.normalize();
    return radius * std::pow(ud(rng), 1.0 / dim) * u;
}

}  // namespace

MapPtr make_identity(int d) {
    const Mat I = Mat::Identity(2 * d, 2 * d);
    return std::make_shared<LinearMap>(d, I, I, MapKind::Identity);
}

MapPtr make_rotation(int d, std::vector<double> angles) {
    angles.resize(d, 0.0);
    Mat A = Mat::Zero(2 * d, 2 * d), Ai = Mat::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) {
        const double c = std::cos(angles[i]), s = std::sin(angles[i]);
        A.block<2, 2>(2 * i, 2 * i) << c, -s, s, c;
        Ai.block<2, 2>(2 * i, 2 * i) << c, s, -s, c;
    }
    return std::make_shared<LinearMap>(d, A, Ai, MapKind::Rotation);
}

MapPtr make_shear(int d, double c) {
    Mat A = Mat::Identity(2 * d, 2 * d), Ai = Mat::Identity(2 * d, 2 * d);
    A(0, 1) = c;
    Ai(0, 1) = -c;
    return std::make_shared<LinearMap>(d, A, Ai, MapKind::Shear);
}

MapPtr make_mixing(int d, double c, Vec a) {
    if (a.size() != 2 * d) throw DimensionError("mixing vector has wrong size");
    const Vec Ja = apply_J(a);
    const Mat I = Mat::Identity(2 * d, 2 * d);
    // <a, Ja> = 0 makes the flow of <a,x>^2/2 affine in time
    return std::make_shared<LinearMap>(d, I + c * Ja * a.transpose(), I - c * Ja * a.transpose(), MapKind::Linear);
}

MapPtr make_plane_wave(int d, double eps, Vec a) {
    if (a.size() != 2 * d) throw DimensionError("plane-wave vector has wrong size");
    return std::make_shared<PlaneWaveMap>(d, eps, std::move(a));
}

MapPtr make_bump_flow(int d, const BumpFlowParams& p) { return std::make_shared<BumpFlowMap>(d, p); }

namespace {

class InverseMap final : public Symplectomorphism {
public:
    explicit InverseMap(MapPtr phi) : Symplectomorphism(phi->pairs()), phi_(std::move(phi)) {
        bound_d1 = phi_->bound_d1;
        bound_d2 = phi_->bound_d2;
    }
    Vec forward(const Vec& x) const override { return phi_->inverse(x); }
    Vec inverse(const Vec& x) const override { return phi_->forward(x); }
    Mat dforward(const Vec& x) const override { return phi_->dinverse(x); }
    Mat dinverse(const Vec& x) const override { return phi_->dforward(x); }
    MapKind kind() const override { return phi_->kind(); }
    std::optional<Mat> linear_part() const override {
        auto L = phi_->linear_part();
        if (!L) return std::nullopt;
        return Mat(L->inverse());
    }

private:
    MapPtr phi_;
};

}  // namespace

MapPtr make_inverse(MapPtr phi) {
    if (phi->kind() == MapKind::Identity) return phi;
    return std::make_shared<InverseMap>(std::move(phi));
}

MapPtr make_composition(std::vector<MapPtr> maps) {
    if (maps.empty()) throw DimensionError("empty composition");
    return std::make_shared<CompositionMap>(std::move(maps));
}

Vec spread_vector(int d, bool geometric) {
    Vec a(2 * d);
    for (int i = 0; i < d; ++i) {
        const double w = geometric ? std::pow(0.5, i) : 1.0;
        a[2 * i] = w;
        a[2 * i + 1] = 0.5 * w;
    }
    return a / a.norm();
}

MapPtr elementary_decompose_example(int d, int n0, double eps) {
    if (eps < 0.0) throw DomainError("perturbation size must be nonnegative");
    std::vector<double> angles(d);
    for (int i = 0; i < d; ++i) angles[i] = 0.3 + 0.1 * i;
    BumpFlowParams bp;
    bp.n0 = n0;
    bp.amplitude = 0.5;
    bp.width = 1.0;
    bp.center = Vec::Zero(2 * n0);
    bp.center[0] = 0.2;
    return make_composition({make_rotation(d, angles), make_plane_wave(d, eps, spread_vector(d, true)),
                             make_bump_flow(d, bp)});
}

MapChecks check_map(const Symplectomorphism& phi, double radius, int samples, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    const int dim = 2 * phi.pairs();
    const Mat J = SymplecticSpace(phi.pairs()).J();
    MapChecks out;
    for (int s = 0; s < samples; ++s) {
        const Vec x = random_in_ball(rng, dim, radius);
        const Mat D = phi.dforward(x);
        const Mat Di = phi.dinverse(x);
        out.symplectic_err = std::max(out.symplectic_err, (D.transpose() * J * D - J).cwiseAbs().maxCoeff());
        out.symplectic_err = std::max(out.symplectic_err, (Di.transpose() * J * Di - J).cwiseAbs().maxCoeff());
        out.inverse_err = std::max(out.inverse_err, (phi.inverse(phi.forward(x)) - x).norm());
        out.inverse_err = std::max(out.inverse_err, (phi.forward(phi.inverse(x)) - x).norm());
    }
    return out;
}

FourierLoop push_loop(const Symplectomorphism& phi, const FourierLoop& x, int K_out, int M) {
    if (x.pairs() != phi.pairs()) throw DimensionError("map and loop live in different spaces");
    if (phi.kind() == MapKind::Identity) return x.with_order(K_out);
    GridSamples g = sample(x, M);
    for (int j = 0; j < M; ++j) g.values.col(j) = phi.forward(g.values.col(j));
    return analyze(g, K_out);
}

PushforwardH::PushforwardH(HamPtr H, MapPtr phi) : H_(std::move(H)), phi_(std::move(phi)) {
    if (!std::isnan(phi_->bound_d1) && phi_->bound_d2 == 0.0) lipschitz = H_->lipschitz * phi_->bound_d1 * phi_->bound_d1;
}

double PushforwardH::value(const Vec& x) const { return H_->value(phi_->inverse(x)); }

Vec PushforwardH::gradient(const Vec& x) const {
    return phi_->dinverse(x).transpose() * H_->gradient(phi_->inverse(x));
}

HamPtr pushforward(HamPtr H, MapPtr phi) { return std::make_shared<PushforwardH>(std::move(H), std::move(phi)); }

std::pair<double, double> action_transport_check(const MapPtr& phi, const HamPtr& H, const FourierLoop& x, int M) {
    const PushforwardH G(H, phi);
    const FourierLoop y = push_loop(*phi, x, x.order(), M);
    return {action(x, *H, M), action(y, G, M)};
}

double commutator_norm(const Mat& A, int n, int iterations) {
    const Eigen::Index dim = A.rows();
    Mat P = Mat::Zero(dim, dim);
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(2 * n, dim); ++i) P(i, i) = 1.0;
    const Mat At = A.transpose();
    const Mat C = P * At - At * P;
    if (C.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    Vec v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = 1.0 + 0.1 * i;
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vec w = C.transpose() * (C * v);
        const double nw = w.norm();
        if (nw == 0.0) break;
        v = w / nw;
        sigma = (C * v).norm();
    }
    return sigma;
}

AdmissibilityReport admissibility_scan(const Symplectomorphism& phi, double radius, const std::vector<int>& n_list,
                                       int sample_count, unsigned long long seed) {
    const int d = phi.pairs();
    std::mt19937_64 rng(seed);
    std::vector<Vec> pts;
    pts.reserve(sample_count);
    for (int s = 0; s < sample_count; ++s) pts.push_back(random_in_ball(rng, 2 * d, radius));

    AdmissibilityReport rep;
    for (int n : n_list) {
        if (n < 1 || n > d) throw DimensionError("admissibility index outside 1..d");
        AdmissibilityRow row;
        row.n = n;
        for (const Vec& x : pts) {
            const Vec px = project_ambient(x, n);
            const Vec fx = phi.forward(px), ix = phi.inverse(px);
            row.proj_forward = std::max(row.proj_forward, (fx - project_ambient(fx, n)).norm());
            row.proj_inverse = std::max(row.proj_inverse, (ix - project_ambient(ix, n)).norm());
            row.comm_forward = std::max(row.comm_forward, commutator_norm(phi.dforward(x), n));
            row.comm_inverse = std::max(row.comm_inverse, commutator_norm(phi.dinverse(x), n));
        }
        rep.rows.push_back(row);
    }

    // trend over n < d (P_d is the identity, so the last rung carries no information)
    std::vector<const AdmissibilityRow*> body;
    for (const auto& r : rep.rows)
        if (r.n < d) body.push_back(&r);
    auto decaying = [&](auto get) {
        if (body.size() < 2) return true;
        double mx = 0.0;
        for (auto* r : body) mx = std::max(mx, get(*r));
        if (mx <= 1e-12) return true;
        return get(*body.back()) <= 0.5 * get(*body.front());
    };
    rep.proj_decaying = decaying([](const AdmissibilityRow& r) { return std::max(r.proj_forward, r.proj_inverse); });
    rep.comm_decaying = decaying([](const AdmissibilityRow& r) { return std::max(r.comm_forward, r.comm_inverse); });
    rep.flagged = !rep.comm_decaying;
    return rep;
}

std::string admissibility_csv(const AdmissibilityReport& rep) {
    std::ostringstream os;
    os.precision(17);
    os << "n,proj_forward,proj_inverse,comm_forward,comm_inverse\n";
    for (const auto& r : rep.rows)
        os << r.n << ',' << r.proj_forward << ',' << r.proj_inverse << ',' << r.comm_forward << ',' << r.comm_inverse
           << '\n';
    return os.str();
}

}  // namespace nsq
