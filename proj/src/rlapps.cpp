#include "rlapps.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"

namespace ttsa {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(ErrorCode::ConfigError, msg);
}

Mat outer(const Vec& x, const Vec& y) {
    Mat m(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) m(i, j) = x[i] * y[j];
    return m;
}

// Enumerated tuple chain: states, kernel, and the per-tuple observation
// blocks shared by both methods.
struct TupleChain {
    std::vector<std::array<int, 3>> tuples;
    Mat kernel;
    Vec mu;
    Mat p_policy;
};

TupleChain enumerate_tuples(const FiniteMdp& mdp, bool generative) {
    TupleChain tc;
    tc.p_policy = policy_kernel(mdp);
    tc.mu = stationary_distribution(tc.p_policy);
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            if (mdp.policy(s, a) <= 0.0) continue;
            for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2)
                if (mdp.transition[a](s, s2) > 0.0)
                    tc.tuples.push_back({static_cast<int>(s), static_cast<int>(a),
                                         static_cast<int>(s2)});
        }
    const std::size_t m = tc.tuples.size();
    // Tuple (s,a,s') moves to (s', a2, s2') with the policy/transition law;
    // the stationary tuple law is mu(s) policy(s,a) transition[a](s,s').
    Vec tuple_law(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& t = tc.tuples[i];
        tuple_law[i] = tc.mu[t[0]] * mdp.policy(t[0], t[1]) * mdp.transition[t[1]](t[0], t[2]);
    }
    tc.kernel = Mat(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const auto& from = tc.tuples[i];
            const auto& to = tc.tuples[j];
            if (generative) {
                tc.kernel(i, j) = tuple_law[j];
            } else if (to[0] == from[2]) {
                tc.kernel(i, j) = mdp.policy(to[0], to[1]) * mdp.transition[to[1]](to[0], to[2]);
            }
        }
    return tc;
}

struct TupleBlocks {
    Vec phi, phi_next;  // phi(s), phi(s')
    double r = 0.0;
    Vec td_vec;  // phi - lambda * phi_next
};

TupleBlocks blocks_at(const FiniteMdp& mdp, const FeatureMap& f, const std::array<int, 3>& t) {
    TupleBlocks b;
    b.phi = f.phi[t[0]];
    b.phi_next = f.phi[t[2]];
    b.r = mdp.reward(t[0], t[1]);
    b.td_vec.resize(b.phi.size());
    for (std::size_t i = 0; i < b.phi.size(); ++i)
        b.td_vec[i] = b.phi[i] - mdp.discount * b.phi_next[i];
    return b;
}

}  // namespace

void validate_mdp(const FiniteMdp& mdp, const FeatureMap& features) {
    require(mdp.n_states > 0 && mdp.n_actions > 0, "MDP needs at least one state and action");
    require(mdp.transition.size() == mdp.n_actions, "one transition matrix per action");
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        const Mat& t = mdp.transition[a];
        require(t.rows() == mdp.n_states && t.cols() == mdp.n_states,
                "transition matrix " + std::to_string(a) + " has wrong shape");
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            double sum = 0.0;
            for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) {
                require(t(s, s2) >= 0.0, "negative transition probability");
                sum += t(s, s2);
            }
            require(std::abs(sum - 1.0) <= 1e-12,
                    "transition row (action " + std::to_string(a) + ", state " +
                        std::to_string(s) + ") sums to " + std::to_string(sum));
        }
    }
    require(mdp.reward.rows() == mdp.n_states && mdp.reward.cols() == mdp.n_actions,
            "reward must be n_states x n_actions");
    for (std::size_t i = 0; i < mdp.n_states * mdp.n_actions; ++i)
        require(mdp.reward.data()[i] >= 0.0 && mdp.reward.data()[i] <= 1.0,
                "rewards must lie in [0, 1]");
    require(mdp.discount > 0.0 && mdp.discount < 1.0, "discount must lie in (0, 1)");
    require(mdp.policy.rows() == mdp.n_states && mdp.policy.cols() == mdp.n_actions,
            "policy must be n_states x n_actions");
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        double sum = 0.0;
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            require(mdp.policy(s, a) >= 0.0, "negative policy probability");
            sum += mdp.policy(s, a);
        }
        require(std::abs(sum - 1.0) <= 1e-12,
                "policy row " + std::to_string(s) + " sums to " + std::to_string(sum));
    }
    require(features.phi.size() == mdp.n_states, "one feature vector per state");
    const std::size_t d = features.dim();
    require(d > 0, "features must be nonempty");
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        require(features.phi[s].size() == d, "feature dimensions must agree");
        require(norm2(features.phi[s]) <= 1.0 + 1e-12,
                "feature norm at state " + std::to_string(s) + " exceeds 1");
    }
}

Mat policy_kernel(const FiniteMdp& mdp) {
    Mat p(mdp.n_states, mdp.n_states);
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            const double pa = mdp.policy(s, a);
            if (pa <= 0.0) continue;
            for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2)
                p(s, s2) += pa * mdp.transition[a](s, s2);
        }
    return p;
}

Vec policy_reward(const FiniteMdp& mdp) {
    Vec r(mdp.n_states, 0.0);
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a)
            r[s] += mdp.policy(s, a) * mdp.reward(s, a);
    return r;
}

RlInstance build_gtd(const FiniteMdp& mdp, const FeatureMap& features, bool generative) {
    validate_mdp(mdp, features);
    const std::size_t d = features.dim();
    TupleChain tc = enumerate_tuples(mdp, generative);

    std::vector<ObservationData> states;
    states.reserve(tc.tuples.size());
    for (const auto& t : tc.tuples) {
        const TupleBlocks b = blocks_at(mdp, features, t);
        ObservationData obs;
        obs.b1 = Vec(d, 0.0);
        obs.a11 = Mat(d, d);
        obs.a12 = -1.0 * outer(b.td_vec, b.phi);
        obs.b2 = b.r * b.phi;
        obs.a21 = outer(b.phi, b.td_vec);
        obs.a22 = Mat::identity(d);
        states.push_back(std::move(obs));
    }
    NoiseOracle oracle = make_markov_oracle(tc.kernel, std::move(states));

    // Exact expectations under the stationary tuple law.
    Mat a12(d, d), a21(d, d);
    Vec b2(d, 0.0);
    for (std::size_t i = 0; i < oracle.n_states(); ++i) {
        const double w = oracle.pi[i];
        a12 = a12 + w * oracle.states[i].a12;
        a21 = a21 + w * oracle.states[i].a21;
        for (std::size_t j = 0; j < d; ++j) b2[j] += w * oracle.states[i].b2[j];
    }
    TtsaProblem p =
        make_problem(Mat(d, d), a12, a21, Mat::identity(d), Vec(d, 0.0), b2);

    RlInstance inst;
    inst.problem = std::move(p);
    inst.oracle = std::move(oracle);
    inst.tuple_states = std::move(tc.tuples);
    inst.mu = std::move(tc.mu);
    inst.p_policy = std::move(tc.p_policy);
    return inst;
}

RlInstance build_tdc(const FiniteMdp& mdp, const FeatureMap& features, bool generative) {
    validate_mdp(mdp, features);
    const std::size_t d = features.dim();
    TupleChain tc = enumerate_tuples(mdp, generative);

    std::vector<ObservationData> states;
    states.reserve(tc.tuples.size());
    for (const auto& t : tc.tuples) {
        const TupleBlocks b = blocks_at(mdp, features, t);
        ObservationData obs;
        obs.b1 = b.r * b.phi;
        obs.a11 = outer(b.phi, b.td_vec);
        obs.a12 = mdp.discount * outer(b.phi_next, b.phi);
        obs.b2 = obs.b1;
        obs.a21 = obs.a11;
        obs.a22 = outer(b.phi, b.phi);
        states.push_back(std::move(obs));
    }
    NoiseOracle oracle = make_markov_oracle(tc.kernel, std::move(states));

    Mat a11(d, d), a12(d, d), a22(d, d);
    Vec b1(d, 0.0);
    for (std::size_t i = 0; i < oracle.n_states(); ++i) {
        const double w = oracle.pi[i];
        a11 = a11 + w * oracle.states[i].a11;
        a12 = a12 + w * oracle.states[i].a12;
        a22 = a22 + w * oracle.states[i].a22;
        for (std::size_t j = 0; j < d; ++j) b1[j] += w * oracle.states[i].b1[j];
    }

    // The feature second moment drives both timescales; reject a singular one
    // before the generic problem validation can blame the wrong block.
    const auto gram_eig = sym_eig(a22);
    if (gram_eig.values.front() <= 1e-12 * std::max(gram_eig.values.back(), 1e-300))
        throw Error(ErrorCode::SingularFeatureGram,
                    "feature second moment is singular (features do not span under the "
                    "stationary law)");

    // Structural identities of this method: a21 = a11 and a12 = a22 - a11^T.
    const double ident_dev = max_abs(a22 - transpose(a11) - a12);
    if (ident_dev > 1e-12)
        throw Error(ErrorCode::Internal,
                    "expected-block identity violated by " + std::to_string(ident_dev));

    TtsaProblem p = make_problem(a11, a12, a11, a22, b1, b1);

    RlInstance inst;
    inst.problem = std::move(p);
    inst.oracle = std::move(oracle);
    inst.tuple_states = std::move(tc.tuples);
    inst.mu = std::move(tc.mu);
    inst.p_policy = std::move(tc.p_policy);
    return inst;
}

PolicyEvaluation evaluate_policy_exact(const FiniteMdp& mdp, const FeatureMap& features,
                                       TdAlgorithm alg) {
    const RlInstance inst = alg == TdAlgorithm::Gtd ? build_gtd(mdp, features)
                                                    : build_tdc(mdp, features);
    const std::size_t n = mdp.n_states, d = features.dim();

    PolicyEvaluation ev;
    Mat resolvent(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            resolvent(i, j) = (i == j ? 1.0 : 0.0) - mdp.discount * inst.p_policy(i, j);
    ev.v_pi = solve(resolvent, policy_reward(mdp));

    ev.theta_star = inst.problem.theta_star;
    ev.v_theta.resize(n);
    for (std::size_t s = 0; s < n; ++s) ev.v_theta[s] = dot(features.phi[s], ev.theta_star);

    // Projected fixed-point system under the stationary state law:
    // E[phi (phi - lambda phi')^T] theta = E[r phi].
    Mat m(d, d);
    Vec rhs(d, 0.0);
    const Vec r_pi = policy_reward(mdp);
    for (std::size_t s = 0; s < n; ++s) {
        const double w = inst.mu[s];
        for (std::size_t s2 = 0; s2 < n; ++s2) {
            const double ws = w * inst.p_policy(s, s2);
            if (ws == 0.0) continue;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    m(i, j) += ws * features.phi[s][i] *
                               (features.phi[s][j] - mdp.discount * features.phi[s2][j]);
        }
        for (std::size_t i = 0; i < d; ++i) rhs[i] += w * r_pi[s] * features.phi[s][i];
    }
    const Vec resid = m * ev.theta_star - rhs;
    ev.bellman_residual = max_abs(resid);

    double err = 0.0;
    for (std::size_t s = 0; s < n; ++s) err = std::max(err, std::abs(ev.v_theta[s] - ev.v_pi[s]));
    ev.value_error_max = err;
    return ev;
}

}  // namespace ttsa
