#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "errors.hpp"

namespace ttsa {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ConfigError, path + ": " + what);
}

/// Read-only view of a JSON node that remembers its path from the root, so
/// every schema error names the exact offending field.
class Node {
public:
    Node(const json* j, std::string path) : j_(j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    Node at(const std::string& key) const {
        if (!j_->is_object()) fail(path_, "expected an object");
        auto it = j_->find(key);
        if (it == j_->end()) fail(path_, "missing required field '" + key + "'");
        return Node(&*it, path_.empty() ? key : path_ + "." + key);
    }

    std::optional<Node> maybe(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return at(key);
    }

    /// Rejects keys outside the allowed set; typos should not pass silently.
    void check_keys(std::initializer_list<const char*> allowed) const {
        if (!j_->is_object()) fail(path_, "expected an object");
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            bool ok = false;
            for (const char* k : allowed)
                if (it.key() == k) { ok = true; break; }
            if (!ok) fail(path_, "unknown field '" + it.key() + "'");
        }
    }

    std::size_t size() const {
        if (!j_->is_array()) fail(path_, "expected an array");
        return j_->size();
    }

    Node item(std::size_t i) const {
        if (!j_->is_array()) fail(path_, "expected an array");
        if (i >= j_->size()) fail(path_, "index out of range");
        return Node(&(*j_)[i], path_ + "[" + std::to_string(i) + "]");
    }

    double num() const {
        if (!j_->is_number()) fail(path_, "expected a number");
        return j_->get<double>();
    }

    std::int64_t integer() const {
        if (!j_->is_number_integer()) fail(path_, "expected an integer");
        return j_->get<std::int64_t>();
    }

    std::int64_t positive_int() const {
        std::int64_t v = integer();
        if (v <= 0) fail(path_, "expected a positive integer");
        return v;
    }

    bool boolean() const {
        if (!j_->is_boolean()) fail(path_, "expected a boolean");
        return j_->get<bool>();
    }

    std::string str() const {
        if (!j_->is_string()) fail(path_, "expected a string");
        return j_->get<std::string>();
    }

    Vec vec() const {
        const std::size_t n = size();
        if (n == 0) fail(path_, "expected a nonempty numeric array");
        Vec v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = item(i).num();
        return v;
    }

    Mat mat() const {
        const std::size_t r = size();
        if (r == 0) fail(path_, "expected a nonempty array of rows");
        Vec first = item(0).vec();
        Mat m(r, first.size());
        for (std::size_t j = 0; j < first.size(); ++j) m(0, j) = first[j];
        for (std::size_t i = 1; i < r; ++i) {
            Vec row = item(i).vec();
            if (row.size() != first.size()) fail(item(i).path(), "ragged row length");
            for (std::size_t j = 0; j < row.size(); ++j) m(i, j) = row[j];
        }
        return m;
    }

    std::vector<std::int64_t> int_list() const {
        const std::size_t n = size();
        std::vector<std::int64_t> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = item(i).integer();
        return out;
    }

    std::vector<std::string> str_list() const {
        const std::size_t n = size();
        std::vector<std::string> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = item(i).str();
        return out;
    }

private:
    const json* j_;
    std::string path_;
};

ObservationData parse_obs(const Node& n) {
    n.check_keys({"a11", "a12", "a21", "a22", "b1", "b2"});
    ObservationData o;
    o.a11 = n.at("a11").mat();
    o.a12 = n.at("a12").mat();
    o.a21 = n.at("a21").mat();
    o.a22 = n.at("a22").mat();
    o.b1 = n.at("b1").vec();
    o.b2 = n.at("b2").vec();
    return o;
}

TtsaProblem parse_problem(const Node& n) {
    ObservationData o = parse_obs(n);
    return make_problem(std::move(o.a11), std::move(o.a12), std::move(o.a21), std::move(o.a22),
                        std::move(o.b1), std::move(o.b2));
}

NoiseOracle parse_oracle(const Node& n, const TtsaProblem* problem) {
    const std::string kind = n.at("kind").str();
    if (kind == "deterministic") {
        n.check_keys({"kind"});
        if (!problem) fail(n.path(), "deterministic oracle requires a problem section");
        return make_deterministic_oracle(*problem);
    }
    if (kind == "mixture") {
        n.check_keys({"kind", "components"});
        Node comps = n.at("components");
        std::vector<MixtureComponent> components;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            Node c = comps.item(i);
            c.check_keys({"weight", "a11", "a12", "a21", "a22", "b1", "b2"});
            MixtureComponent mc;
            mc.weight = c.at("weight").num();
            ObservationData o;
            o.a11 = c.at("a11").mat();
            o.a12 = c.at("a12").mat();
            o.a21 = c.at("a21").mat();
            o.a22 = c.at("a22").mat();
            o.b1 = c.at("b1").vec();
            o.b2 = c.at("b2").vec();
            mc.obs = std::move(o);
            components.push_back(std::move(mc));
        }
        return make_mixture_oracle(std::move(components));
    }
    if (kind == "perturbation") {
        n.check_keys({"kind", "amps", "entry_dist"});
        if (!problem) fail(n.path(), "perturbation oracle requires a problem section");
        PerturbationAmps amps;
        if (auto a = n.maybe("amps")) {
            a->check_keys({"a11", "a12", "a21", "a22", "b1", "b2"});
            if (auto v = a->maybe("a11")) amps.a11 = v->num();
            if (auto v = a->maybe("a12")) amps.a12 = v->num();
            if (auto v = a->maybe("a21")) amps.a21 = v->num();
            if (auto v = a->maybe("a22")) amps.a22 = v->num();
            if (auto v = a->maybe("b1")) amps.b1 = v->num();
            if (auto v = a->maybe("b2")) amps.b2 = v->num();
        }
        EntryDist dist = EntryDist::Rademacher;
        if (auto d = n.maybe("entry_dist")) {
            const std::string s = d->str();
            if (s == "rademacher") dist = EntryDist::Rademacher;
            else if (s == "uniform") dist = EntryDist::Uniform;
            else fail(d->path(), "expected 'rademacher' or 'uniform'");
        }
        return make_perturbation_oracle(*problem, amps, dist);
    }
    if (kind == "markov") {
        n.check_keys({"kind", "kernel", "states"});
        Mat kernel = n.at("kernel").mat();
        Node st = n.at("states");
        std::vector<ObservationData> states;
        for (std::size_t i = 0; i < st.size(); ++i) states.push_back(parse_obs(st.item(i)));
        return make_markov_oracle(std::move(kernel), std::move(states));
    }
    fail(n.path() + ".kind", "expected 'deterministic', 'mixture', 'perturbation', or 'markov'");
}

ScheduleSpec parse_schedule(const Node& n) {
    ScheduleSpec s;
    if (n.has("preset")) {
        n.check_keys({"preset", "c0_gamma", "c0_beta", "k0", "horizon"});
        s.is_preset = true;
        s.preset = n.at("preset").str();
        if (auto h = n.maybe("horizon")) s.horizon = h->positive_int();
    } else {
        n.check_keys({"a_exp", "b_exp", "c0_gamma", "c0_beta", "k0"});
        s.a_exp = n.at("a_exp").num();
        s.b_exp = n.at("b_exp").num();
    }
    if (auto v = n.maybe("c0_gamma")) s.c0_gamma = v->num();
    if (auto v = n.maybe("c0_beta")) s.c0_beta = v->num();
    if (auto v = n.maybe("k0")) s.k0 = v->positive_int();
    if (!s.is_preset) (void)s.resolve(2);  // validate exponents eagerly
    return s;
}

std::vector<std::int64_t> default_checkpoints(std::int64_t horizon) {
    std::vector<std::int64_t> cp;
    for (std::int64_t k = 1; k < horizon; k *= 2) cp.push_back(k);
    cp.push_back(horizon);
    return cp;
}

SimulateSpec parse_simulate(const Node& n) {
    n.check_keys({"horizon", "replications", "checkpoints", "trajectories"});
    SimulateSpec s;
    s.horizon = n.at("horizon").positive_int();
    s.replications = 1;
    if (auto r = n.maybe("replications")) s.replications = static_cast<std::size_t>(r->positive_int());
    if (auto c = n.maybe("checkpoints")) {
        s.checkpoints = c->int_list();
        if (s.checkpoints.empty()) fail(c->path(), "expected at least one checkpoint");
        for (std::size_t i = 0; i < s.checkpoints.size(); ++i) {
            if (s.checkpoints[i] < 1 || s.checkpoints[i] > s.horizon)
                fail(c->item(i).path(), "checkpoint outside [1, horizon]");
            if (i > 0 && s.checkpoints[i] <= s.checkpoints[i - 1])
                fail(c->item(i).path(), "checkpoints must be strictly increasing");
        }
    } else {
        s.checkpoints = default_checkpoints(s.horizon);
    }
    s.trajectories = std::min<std::size_t>(s.replications, 8);
    if (auto t = n.maybe("trajectories")) {
        const std::int64_t v = t->integer();
        if (v < 0) fail(t->path(), "expected a nonnegative integer");
        s.trajectories = std::min<std::size_t>(static_cast<std::size_t>(v), s.replications);
    }
    return s;
}

std::vector<std::int64_t> parse_n_grid(const Node& n) {
    std::vector<std::int64_t> grid = n.int_list();
    if (grid.empty()) fail(n.path(), "expected at least one grid point");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 1) fail(n.item(i).path(), "grid points must be >= 1");
        if (i > 0 && grid[i] <= grid[i - 1])
            fail(n.item(i).path(), "grid must be strictly increasing");
    }
    return grid;
}

RatesSpec parse_rates(const Node& n) {
    n.check_keys({"targets", "metrics", "n_grid", "replications", "whiten", "directions",
                  "bootstrap"});
    RatesSpec s;
    if (auto t = n.maybe("targets")) {
        for (const std::string& name : t->str_list()) s.targets.push_back(parse_cloud_target(name));
    } else {
        s.targets.push_back(CloudTarget::PrAverage);
    }
    if (s.targets.empty()) fail(n.path() + ".targets", "expected at least one target");
    if (auto m = n.maybe("metrics")) {
        for (const std::string& name : m->str_list()) s.metrics.push_back(parse_metric(name));
    } else {
        s.metrics.push_back(DistanceMetric::Ks1d);
    }
    if (s.metrics.empty()) fail(n.path() + ".metrics", "expected at least one metric");
    s.n_grid = parse_n_grid(n.at("n_grid"));
    s.replications = static_cast<std::size_t>(n.at("replications").positive_int());
    if (s.replications < 100)
        fail(n.path() + ".replications", "distance estimates need at least 100 replications");
    if (auto w = n.maybe("whiten")) s.whiten = w->boolean();
    if (auto d = n.maybe("directions"))
        s.directions = static_cast<std::size_t>(d->positive_int());
    if (auto b = n.maybe("bootstrap")) {
        const std::int64_t v = b->integer();
        if (v < 0) fail(b->path(), "expected a nonnegative integer");
        s.bootstrap = static_cast<std::size_t>(v);
    }
    return s;
}

CovarianceSpec parse_covariance(const Node& n) {
    n.check_keys({"n_grid"});
    CovarianceSpec s;
    s.n_grid = parse_n_grid(n.at("n_grid"));
    if (s.n_grid.size() < 2) fail(n.path() + ".n_grid", "expected at least two grid points");
    return s;
}

MdpSpec parse_mdp(const Node& n) {
    n.check_keys({"n_states", "n_actions", "discount", "transition", "reward", "policy",
                  "features", "algorithm", "generative"});
    MdpSpec s;
    FiniteMdp& m = s.mdp;
    m.n_states = static_cast<std::size_t>(n.at("n_states").positive_int());
    m.n_actions = static_cast<std::size_t>(n.at("n_actions").positive_int());
    m.discount = n.at("discount").num();

    Node tr = n.at("transition");
    if (tr.size() != m.n_states) fail(tr.path(), "expected one row of actions per state");
    m.transition.assign(m.n_actions, Mat(m.n_states, m.n_states));
    for (std::size_t sidx = 0; sidx < m.n_states; ++sidx) {
        Node per_action = tr.item(sidx);
        if (per_action.size() != m.n_actions)
            fail(per_action.path(), "expected one distribution per action");
        for (std::size_t a = 0; a < m.n_actions; ++a) {
            Vec row = per_action.item(a).vec();
            if (row.size() != m.n_states)
                fail(per_action.item(a).path(), "expected one probability per next state");
            for (std::size_t s2 = 0; s2 < m.n_states; ++s2) m.transition[a](sidx, s2) = row[s2];
        }
    }

    m.reward = n.at("reward").mat();
    m.policy = n.at("policy").mat();

    Node feats = n.at("features");
    if (feats.size() != m.n_states) fail(feats.path(), "expected one feature vector per state");
    for (std::size_t sidx = 0; sidx < m.n_states; ++sidx)
        s.features.phi.push_back(feats.item(sidx).vec());

    const std::string alg = n.at("algorithm").str();
    if (alg == "gtd") s.algorithm = TdAlgorithm::Gtd;
    else if (alg == "tdc") s.algorithm = TdAlgorithm::Tdc;
    else fail(n.path() + ".algorithm", "expected 'gtd' or 'tdc'");

    if (auto g = n.maybe("generative")) s.generative = g->boolean();
    return s;
}

}  // namespace

StepSchedule ScheduleSpec::resolve(std::int64_t default_horizon) const {
    if (is_preset) {
        const std::int64_t h = horizon.value_or(default_horizon);
        return make_preset_schedule(preset, h, c0_gamma, c0_beta, k0);
    }
    return make_schedule(a_exp, b_exp, c0_gamma, c0_beta, k0);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    json root_json;
    try {
        root_json = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    if (!root_json.is_object()) throw Error(ErrorCode::ConfigError, "config root must be an object");

    Node root(&root_json, "");
    root.check_keys({"problem", "oracle", "schedule", "simulate", "experiment", "covariance",
                     "mdp"});

    ExperimentConfig cfg;
    cfg.config_hash = fnv1a64(text);
    if (auto p = root.maybe("problem")) cfg.problem = parse_problem(*p);
    if (auto o = root.maybe("oracle"))
        cfg.oracle = parse_oracle(*o, cfg.problem ? &*cfg.problem : nullptr);
    if (auto s = root.maybe("schedule")) cfg.schedule = parse_schedule(*s);
    if (auto s = root.maybe("simulate")) cfg.simulate = parse_simulate(*s);
    if (auto e = root.maybe("experiment")) cfg.rates = parse_rates(*e);
    if (auto c = root.maybe("covariance")) cfg.covariance = parse_covariance(*c);
    if (auto m = root.maybe("mdp")) cfg.mdp = parse_mdp(*m);
    return cfg;
}

}  // namespace ttsa
