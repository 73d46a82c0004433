#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsq/hamiltonians.hpp"
#include "nsq/loop_space.hpp"

namespace nsq {

enum class MapKind { Identity, Rotation, Shear, Linear, FiniteDimNonlinear, PlaneWave, Composition };

std::string to_string(MapKind k);

class Symplectomorphism {
public:
    explicit Symplectomorphism(int d) : d_(d) {}
    virtual ~Symplectomorphism() = default;

    virtual Vec forward(const Vec& x) const = 0;
    virtual Vec inverse(const Vec& x) const = 0;
    /// D phi at x
    virtual Mat dforward(const Vec& x) const = 0;
    /// D (phi^{-1}) at x
    virtual Mat dinverse(const Vec& x) const = 0;
    virtual MapKind kind() const = 0;
    /// Matrix if the map is linear.
    virtual std::optional<Mat> linear_part() const { return std::nullopt; }

    int pairs() const { return d_; }

    double bound_d1 = std::numeric_limits<double>::quiet_NaN();
    double bound_d2 = std::numeric_limits<double>::quiet_NaN();

private:
    int d_;
};

using MapPtr = std::shared_ptr<const Symplectomorphism>;

MapPtr make_identity(int d);
/// Block rotation by angles[i] in plane (e_i, f_i); missing angles are 0.
MapPtr make_rotation(int d, std::vector<double> angles);
/// (q1,p1) -> (q1 + c p1, p1), identity elsewhere.
MapPtr make_shear(int d, double c);
/// Linear symplectic map x -> x + c J a <a,x>; with a spread over all pairs this
/// couples every plane to every other.
MapPtr make_mixing(int d, double c, Vec a);
/// x -> x + eps cos(<a,x>) J a, the exact time-eps flow of sin(<a,x>).
MapPtr make_plane_wave(int d, double eps, Vec a);

struct BumpFlowParams {
    int n0 = 1;
    double amplitude = 0.5;
    double width = 1.0;
    Vec center;       // in R^{2 n0}; zero if empty
    int steps = 0;    // 0: chosen from the gradient Lipschitz bound
};

/// Time-1 flow of a compactly supported bump on the first n0 pairs
/// (2-stage Gauss-Legendre, tangent map differentiated through the stages).
MapPtr make_bump_flow(int d, const BumpFlowParams& p);

/// maps[0] o maps[1] o ... (last applied first)
MapPtr make_composition(std::vector<MapPtr> maps);

MapPtr make_inverse(MapPtr phi);

/// L o (I + phi_eps) o (I + phi_{n0})
MapPtr elementary_decompose_example(int d, int n0, double eps);

/// Uniform weights over all pairs (non-admissible) or geometric 2^{-i} (admissible trend).
Vec spread_vector(int d, bool geometric);

struct MapChecks {
    double symplectic_err = 0.0;
    double inverse_err = 0.0;
};

MapChecks check_map(const Symplectomorphism& phi, double radius, int samples, unsigned long long seed);

/// Sample, apply phi pointwise, analyze at K_out.
FourierLoop push_loop(const Symplectomorphism& phi, const FourierLoop& x, int K_out, int M);

/// G = H o phi^{-1}
class PushforwardH final : public Hamiltonian {
public:
    PushforwardH(HamPtr H, MapPtr phi);
    double value(const Vec& x) const override;
    Vec gradient(const Vec& x) const override;
    HamKind kind() const override { return HamKind::Pushforward; }
    const HamPtr& base() const { return H_; }
    const MapPtr& map() const { return phi_; }

private:
    HamPtr H_;
    MapPtr phi_;
};

HamPtr pushforward(HamPtr H, MapPtr phi);

/// (A_H(x), A_G(phi_* x)) with G = H o phi^{-1}
std::pair<double, double> action_transport_check(const MapPtr& phi, const HamPtr& H, const FourierLoop& x, int M);

struct AdmissibilityRow {
    int n = 0;
    double proj_forward = 0.0;
    double proj_inverse = 0.0;
    double comm_forward = 0.0;
    double comm_inverse = 0.0;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityRow> rows;
    bool proj_decaying = true;
    bool comm_decaying = true;
    bool flagged = false;  // non-decaying commutator trend
};

/// Spectral norm of [P_n, A^T] by 30 power iterations.
double commutator_norm(const Mat& A, int n, int iterations = 30);

AdmissibilityReport admissibility_scan(const Symplectomorphism& phi, double radius, const std::vector<int>& n_list,
                                       int sample_count, unsigned long long seed);

std::string admissibility_csv(const AdmissibilityReport& rep);

}  // namespace nsq
