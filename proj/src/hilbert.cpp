#include "qmonty/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qmonty {

namespace {

using RowMat3 = Eigen::Matrix<Complex, 3, 3, Eigen::RowMajor>;

Mat3 joint_to_matrix(const Vec9& v) {
    return Eigen::Map<const RowMat3>(v.data());
}

Vec9 matrix_to_joint(const Mat3& m) {
    Vec9 v;
    Eigen::Map<RowMat3>(v.data()) = m;
    return v;
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

} // namespace

// ---------------------------------------------------------------- types

StateVector::StateVector(const Vec3& v) : v_(v) {
    if (std::abs(v.norm() - 1.0) > kEps) {
        throw std::invalid_argument("StateVector: vector is not normalized");
    }
}

StateVector StateVector::normalized(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DegenerateInput("StateVector::normalized: zero or non-finite vector");
    }
    return StateVector(v / n);
}

StateVector StateVector::basis(int k) {
    if (k < 0 || k > 2) throw std::out_of_range("StateVector::basis: index out of range");
    Vec3 v = Vec3::Zero();
    v(k) = 1.0;
    return StateVector(v);
}

Projector Projector::onto(const StateVector& v) {
    Projector p(v.vec() * v.vec().adjoint());
    p.ray_ = v.vec();
    return p;
}

Projector Projector::from_matrix(const Mat3& m) {
    if (!is_hermitian(m)) throw InvalidProjector("projector is not Hermitian");
    if (max_abs_entry(m * m - m) > kEps) throw InvalidProjector("projector is not idempotent");
    const double tr = m.trace().real();
    if (std::abs(tr - std::round(tr)) > kEps) throw InvalidProjector("projector trace is not an integer");
    Projector p(m);
    if (p.rank() == 1) p.ray_ = top_eigenvector(m);
    return p;
}

Projector Projector::identity() { return Projector(Mat3::Identity()); }

int Projector::rank() const { return static_cast<int>(std::lround(trace())); }

StateVector Projector::ray() const {
    if (!ray_ || rank() != 1) throw InvalidProjector("projector is not rank one");
    // No renormalization: onto(p.ray()).ray() must reproduce p.ray() exactly.
    return StateVector(normalize_phase(*ray_));
}

Projector Projector::complement() const { return Projector(Mat3::Identity() - m_); }

DensityOperator::DensityOperator(const Mat3& m) : m_(m) {
    if (!is_hermitian(m)) throw std::invalid_argument("DensityOperator: not Hermitian");
    if (std::abs(m.trace().real() - 1.0) > kEps) {
        throw std::invalid_argument("DensityOperator: trace differs from 1");
    }
    if (hermitian_eigenvalues(m)(0) < -kEps) {
        throw std::invalid_argument("DensityOperator: negative eigenvalue");
    }
}

DensityOperator DensityOperator::pure(const StateVector& v) {
    return DensityOperator(v.vec() * v.vec().adjoint());
}

DensityOperator DensityOperator::maximally_mixed() {
    return DensityOperator(Mat3::Identity() / 3.0);
}

JointState::JointState(const Vec9& v) : v_(v) {
    if (std::abs(v.norm() - 1.0) > kEps) {
        throw std::invalid_argument("JointState: vector is not normalized");
    }
}

JointState JointState::normalized(const Vec9& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DegenerateInput("JointState::normalized: zero or non-finite vector");
    }
    return JointState(v / n);
}

JointState JointState::product(const StateVector& game, const StateVector& notepad) {
    return JointState(matrix_to_joint(game.vec() * notepad.vec().transpose()));
}

Mat3 JointState::as_matrix() const { return joint_to_matrix(v_); }

Povm::Povm(std::vector<Effect> effects) : effects_(std::move(effects)) {
    if (effects_.empty()) throw std::invalid_argument("Povm: no effects");
    Mat3 sum = Mat3::Zero();
    roots_.reserve(effects_.size());
    for (const auto& e : effects_) {
        if (!is_hermitian(e.op)) {
            throw std::invalid_argument("Povm: effect '" + e.label + "' is not Hermitian");
        }
        if (hermitian_eigenvalues(e.op)(0) < -kEps) {
            throw std::invalid_argument("Povm: effect '" + e.label + "' is not positive");
        }
        sum += e.op;
        roots_.push_back(psd_sqrt(e.op));
    }
    if (max_abs_entry(sum - Mat3::Identity()) > kEps) {
        throw std::invalid_argument("Povm: effects do not sum to the identity");
    }
}

Povm Povm::projective(const std::vector<StateVector>& basis,
                      const std::vector<std::string>& labels) {
    std::vector<Effect> effects;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        std::string label = i < labels.size() ? labels[i] : std::to_string(i);
        effects.push_back({std::move(label), basis[i].vec() * basis[i].vec().adjoint()});
    }
    return Povm(std::move(effects));
}

// -------------------------------------------------------------- algebra

Complex inner(const Vec3& a, const Vec3& b) { return a.dot(b); }  // Eigen conjugates the left side

Vec3 cross(const Vec3& a, const Vec3& b) {
    return Vec3(a(1) * b(2) - a(2) * b(1),
                a(2) * b(0) - a(0) * b(2),
                a(0) * b(1) - a(1) * b(0));
}

Complex det3(const Vec3& a, const Vec3& b, const Vec3& c) {
    return a.cwiseProduct(cross(b, c)).sum();
}

StateVector orthogonal_complement_vector(const StateVector& phi, const StateVector& psi) {
    const Vec3 raw = cross(phi.vec(), psi.vec()).conjugate();
    if (raw.norm() <= kEps) {
        throw DegenerateInput("orthogonal_complement_vector: inputs are parallel");
    }
    // One Gram-Schmidt pass removes rounding left by the closed form.
    Vec3 chi = raw / raw.norm();
    chi -= inner(phi.vec(), chi) * phi.vec();
    Vec3 psi_perp = psi.vec() - inner(phi.vec(), psi.vec()) * phi.vec();
    psi_perp /= psi_perp.norm();
    chi -= inner(psi_perp, chi) * psi_perp;
    return normalize_phase(StateVector::normalized(chi));
}

Vec3 normalize_phase(const Vec3& chi) {
    for (int i = 0; i < 3; ++i) {
        const double mod = std::abs(chi(i));
        if (mod > kEps) {
            const Complex phase = std::conj(chi(i)) / mod;
            Vec3 out = chi * phase;
            out(i) = Complex(mod, 0.0);
            return out;
        }
    }
    return chi;
}

StateVector normalize_phase(const StateVector& chi) {
    return StateVector::normalized(normalize_phase(chi.vec()));
}

double overlap2(const StateVector& a, const StateVector& b) {
    return std::norm(inner(a, b));
}

// ------------------------------------------------------------- sampling

StateVector haar_random_unit(RandomStream& rng) {
    for (;;) {
        Vec3 g;
        for (int i = 0; i < 3; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(i) = Complex(re, im);
        }
        const double n = g.norm();
        if (n > 1e-12) return StateVector(g / n);
    }
}

StateVector random_real_unit(RandomStream& rng) {
    for (;;) {
        Vec3 g;
        for (int i = 0; i < 3; ++i) g(i) = Complex(rng.normal(), 0.0);
        const double n = g.norm();
        if (n > 1e-12) return StateVector(g / n);
    }
}

StateVector haar_random_in_complement(const StateVector& avoid, RandomStream& rng) {
    for (;;) {
        const Vec3 g = haar_random_unit(rng).vec();
        const Vec3 perp = g - inner(avoid.vec(), g) * avoid.vec();
        if (perp.norm() > 1e-6) {
            Vec3 v = perp / perp.norm();
            v -= inner(avoid.vec(), v) * avoid.vec();
            return StateVector::normalized(v);
        }
    }
}

std::vector<StateVector> random_completion(const StateVector& first, RandomStream& rng) {
    StateVector second = haar_random_in_complement(first, rng);
    StateVector third = orthogonal_complement_vector(first, second);
    return {first, second, third};
}

// ---------------------------------------------------------- measurement

double born_probability(const StateVector& state, const Projector& q) {
    return clamp01((state.vec().adjoint() * q.matrix() * state.vec())(0, 0).real());
}

double born_probability(const JointState& state, const Projector& q) {
    return clamp01(apply_game(q.matrix(), state.vec()).squaredNorm());
}

double born_probability(const DensityOperator& state, const Projector& q) {
    return clamp01((q.matrix() * state.matrix()).trace().real());
}

double born_probability(const PrizeState& state, const Projector& q) {
    return std::visit([&](const auto& s) { return born_probability(s, q); }, state);
}

MeasureOutcome<StateVector> lueders_measure(const StateVector& state, const Projector& q,
                                            RandomStream& rng) {
    const double p_yes = born_probability(state, q);
    const bool yes = rng.uniform() < p_yes;
    const Mat3 op = yes ? q.matrix() : Mat3(Mat3::Identity() - q.matrix());
    return {yes, StateVector::normalized(op * state.vec())};
}

MeasureOutcome<JointState> lueders_measure(const JointState& state, const Projector& q,
                                           RandomStream& rng) {
    const double p_yes = born_probability(state, q);
    const bool yes = rng.uniform() < p_yes;
    const Mat3 op = yes ? q.matrix() : Mat3(Mat3::Identity() - q.matrix());
    return {yes, JointState::normalized(apply_game(op, state.vec()))};
}

MeasureOutcome<DensityOperator> lueders_measure(const DensityOperator& state,
                                                const Projector& q, RandomStream& rng) {
    const double p_yes = born_probability(state, q);
    const bool yes = rng.uniform() < p_yes;
    const Mat3 op = yes ? q.matrix() : Mat3(Mat3::Identity() - q.matrix());
    Mat3 post = op * state.matrix() * op;
    const double tr = post.trace().real();
    if (!(tr > 0.0)) throw DegenerateInput("lueders_measure: outcome has zero probability");
    post /= tr;
    post = 0.5 * (post + post.adjoint()).eval();
    return {yes, DensityOperator(post)};
}

MeasureOutcome<PrizeState> lueders_measure(const PrizeState& state, const Projector& q,
                                           RandomStream& rng) {
    return std::visit(
        [&](const auto& s) -> MeasureOutcome<PrizeState> {
            auto r = lueders_measure(s, q, rng);
            return {r.yes, PrizeState(std::move(r.post))};
        },
        state);
}

JointState maximally_entangled() {
    return JointState(matrix_to_joint(Mat3::Identity() / std::sqrt(3.0)));
}

Mat3 transpose_op(const Mat3& x) { return x.transpose(); }

DensityOperator reduced_state(const JointState& joint, Factor factor) {
    const Mat3 m = joint.as_matrix();
    Mat3 rho = factor == Factor::first ? Mat3(m * m.adjoint())
                                       : Mat3(m.transpose() * m.conjugate());
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOperator(rho);
}

DensityOperator game_state(const PrizeState& state) {
    struct Visitor {
        DensityOperator operator()(const StateVector& s) const { return DensityOperator::pure(s); }
        DensityOperator operator()(const JointState& s) const { return reduced_state(s, Factor::first); }
        DensityOperator operator()(const DensityOperator& s) const { return s; }
    };
    return std::visit(Visitor{}, state);
}

Vec9 apply_game(const Mat3& x, const Vec9& v) {
    return matrix_to_joint(x * joint_to_matrix(v));
}

Vec9 apply_notepad(const Mat3& a, const Vec9& v) {
    return matrix_to_joint(joint_to_matrix(v) * a.transpose());
}

NotepadOutcome measure_notepad(const JointState& joint, const Povm& povm, RandomStream& rng) {
    std::vector<Vec9> images;
    std::vector<double> probs;
    images.reserve(povm.size());
    probs.reserve(povm.size());
    for (std::size_t i = 0; i < povm.size(); ++i) {
        images.push_back(apply_notepad(povm.sqrt_effect(i), joint.vec()));
        probs.push_back(images.back().squaredNorm());
    }
    const std::size_t x = rng.discrete(probs);
    return {x, povm.effects()[x].label, probs[x], JointState::normalized(images[x])};
}

// ------------------------------------------------------------- helpers

bool is_hermitian(const Mat3& m, double tol) {
    return max_abs_entry(m - m.adjoint()) <= tol;
}

double max_abs_entry(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::Vector3d hermitian_eigenvalues(const Mat3& m) {
    Eigen::SelfAdjointEigenSolver<Mat3> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

Mat3 psd_sqrt(const Mat3& m) {
    Eigen::SelfAdjointEigenSolver<Mat3> solver(m);
    const Eigen::Vector3d ev = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Mat3& u = solver.eigenvectors();
    return u * ev.cast<Complex>().asDiagonal() * u.adjoint();
}

Vec3 top_eigenvector(const Mat3& m) {
    Eigen::SelfAdjointEigenSolver<Mat3> solver(m);
    return solver.eigenvectors().col(2);
}

} // namespace qmonty
