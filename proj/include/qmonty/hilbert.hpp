// hilbert.hpp: complex linear algebra on the 3-dimensional game space and
// the 9-dimensional game ⊗ notepad space.
//
// Conventions:
//  * inner(a, b) is antilinear in the first argument: Σ conj(a_i) b_i.
//  * A JointState stores amplitude (k, l) at index 3k + l, with k the
//    game-space index and l the notepad index. Viewed as a 3×3 matrix M
//    (row k, column l), X ⊗ 1 acts as X·M and 1 ⊗ A acts as M·Aᵀ.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qmonty/errors.hpp"
#include "qmonty/random.hpp"

namespace qmonty {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3cd;
using Vec9 = Eigen::Matrix<Complex, 9, 1>;

// Orthogonality, normalization and idempotence tolerance.
inline constexpr double kEps = 1e-9;

// Unit vector in the game space.
class StateVector {
public:
    // Requires |v| = 1 within kEps; throws std::invalid_argument otherwise.
    explicit StateVector(const Vec3& v);

    // Scales v to unit norm; throws DegenerateInput for the zero vector.
    static StateVector normalized(const Vec3& v);
    static StateVector basis(int k);

    const Vec3& vec() const { return v_; }
    Complex operator[](int i) const { return v_(i); }

private:
    Vec3 v_;
};

// Orthogonal projection on the game space. Rank-1 projectors remember the
// ray they were built from so doors never need an eigen-decomposition.
class Projector {
public:
    static Projector onto(const StateVector& v);
    // Validates Hermiticity and idempotence within kEps; throws InvalidProjector.
    static Projector from_matrix(const Mat3& m);
    static Projector identity();

    const Mat3& matrix() const { return m_; }
    double trace() const { return m_.trace().real(); }
    int rank() const;
    bool is_rank_one() const { return rank() == 1; }
    // Unit vector spanning a rank-1 projector (phase-normalized).
    // Throws InvalidProjector for other ranks.
    StateVector ray() const;
    Projector complement() const;

private:
    explicit Projector(const Mat3& m) : m_(m) {}

    Mat3 m_;
    std::optional<Vec3> ray_;
};

class DensityOperator {
public:
    // Validates Hermitian, positive semidefinite and unit trace within kEps.
    explicit DensityOperator(const Mat3& m);

    static DensityOperator pure(const StateVector& v);
    static DensityOperator maximally_mixed();

    const Mat3& matrix() const { return m_; }

private:
    Mat3 m_;
};

class JointState {
public:
    // Requires unit norm within kEps; throws std::invalid_argument otherwise.
    explicit JointState(const Vec9& v);
    static JointState normalized(const Vec9& v);
    static JointState product(const StateVector& game, const StateVector& notepad);

    const Vec9& vec() const { return v_; }
    Complex operator()(int k, int l) const { return v_(3 * k + l); }
    // Amplitudes as a matrix: row = game index, column = notepad index.
    Mat3 as_matrix() const;

private:
    Vec9 v_;
};

struct Effect {
    std::string label;
    Mat3 op;
};

// Discrete POVM on the 3-dimensional notepad.
class Povm {
public:
    // Validates each effect PSD and Σ effects = 1 within kEps.
    explicit Povm(std::vector<Effect> effects);

    // Projective measurement onto an orthonormal basis.
    static Povm projective(const std::vector<StateVector>& basis,
                           const std::vector<std::string>& labels = {});

    const std::vector<Effect>& effects() const { return effects_; }
    std::size_t size() const { return effects_.size(); }
    // Positive square root of effect i, used for the Lüders-type instrument.
    const Mat3& sqrt_effect(std::size_t i) const { return roots_[i]; }

private:
    std::vector<Effect> effects_;
    std::vector<Mat3> roots_;
};

// State of the prize: a pure vector (classical notepads), an entangled
// game ⊗ notepad vector (quantum notepads), or a mixed state (variants
// where the host touches the prize).
using PrizeState = std::variant<StateVector, JointState, DensityOperator>;

// ---------------------------------------------------------------- algebra

Complex inner(const Vec3& a, const Vec3& b);
inline Complex inner(const StateVector& a, const StateVector& b) { return inner(a.vec(), b.vec()); }

// Formal (bilinear, unconjugated) cross product.
Vec3 cross(const Vec3& a, const Vec3& b);
Complex det3(const Vec3& a, const Vec3& b, const Vec3& c);

// Unit χ orthogonal to both phi and psi, phase-normalized.
// Throws DegenerateInput when phi ∥ psi up to phase.
StateVector orthogonal_complement_vector(const StateVector& phi, const StateVector& psi);

// Multiplies by a unit phase so the first component with modulus > kEps is
// real and positive.
StateVector normalize_phase(const StateVector& chi);
Vec3 normalize_phase(const Vec3& chi);

// Squared overlap |⟨a|b⟩|², i.e. tr(p_a p_b) for the corresponding rays.
double overlap2(const StateVector& a, const StateVector& b);

// ------------------------------------------------------------- sampling

// Unitarily invariant random unit vector (Gaussian-normalize).
StateVector haar_random_unit(RandomStream& rng);
// Uniform on the real unit sphere.
StateVector random_real_unit(RandomStream& rng);
// Unitarily invariant random unit vector orthogonal to `avoid`.
StateVector haar_random_in_complement(const StateVector& avoid, RandomStream& rng);
// Haar-random orthonormal basis whose first element is `first`.
std::vector<StateVector> random_completion(const StateVector& first, RandomStream& rng);

// ---------------------------------------------------------- measurement

template <class State>
struct MeasureOutcome {
    bool yes;
    State post;
};

// Born probability of "yes" for projector q acting on the game factor.
double born_probability(const StateVector& state, const Projector& q);
double born_probability(const JointState& state, const Projector& q);
double born_probability(const DensityOperator& state, const Projector& q);
double born_probability(const PrizeState& state, const Projector& q);

// Binary Lüders measurement {q, 1 − q} on the game factor.
MeasureOutcome<StateVector> lueders_measure(const StateVector& state, const Projector& q,
                                            RandomStream& rng);
MeasureOutcome<JointState> lueders_measure(const JointState& state, const Projector& q,
                                           RandomStream& rng);
MeasureOutcome<DensityOperator> lueders_measure(const DensityOperator& state,
                                                const Projector& q, RandomStream& rng);
MeasureOutcome<PrizeState> lueders_measure(const PrizeState& state, const Projector& q,
                                           RandomStream& rng);

// Ω = (1/√3) Σ_k |kk⟩.
JointState maximally_entangled();

// (Xᵀ)(k, l) = X(l, k); no conjugation.
Mat3 transpose_op(const Mat3& x);

enum class Factor { first, second };

DensityOperator reduced_state(const JointState& joint, Factor factor);
// Game-space density operator of any prize representation.
DensityOperator game_state(const PrizeState& state);

// X ⊗ 1 and 1 ⊗ A applied to a joint vector.
Vec9 apply_game(const Mat3& x, const Vec9& v);
Vec9 apply_notepad(const Mat3& a, const Vec9& v);

struct NotepadOutcome {
    std::size_t index;
    std::string label;
    double probability;
    JointState post;
};

// Measures `povm` on the notepad factor; post-state (1 ⊗ √F_x)·joint, normalized.
NotepadOutcome measure_notepad(const JointState& joint, const Povm& povm, RandomStream& rng);

// ------------------------------------------------------------- helpers

bool is_hermitian(const Mat3& m, double tol = kEps);
// Positive square root of a Hermitian PSD matrix.
Mat3 psd_sqrt(const Mat3& m);
// Eigenvalues of a Hermitian matrix, ascending.
Eigen::Vector3d hermitian_eigenvalues(const Mat3& m);
// Unit eigenvector of the largest eigenvalue of a Hermitian matrix.
Vec3 top_eigenvector(const Mat3& m);
double max_abs_entry(const Mat3& m);

} // namespace qmonty
