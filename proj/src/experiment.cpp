#include "fracgrad/experiment.hpp"

#include <boost/algorithm/string.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <set>
#include <sstream>

namespace fracgrad {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Entry {
    std::string value;
    int line = 0;
};

class Fields {
public:
    Fields(std::map<std::string, Entry> kv, std::string source) : kv_(std::move(kv)), source_(std::move(source)) {}

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        std::ostringstream os;
        os << source_;
        auto it = kv_.find(key);
        if (it != kv_.end()) os << ':' << it->second.line;
        os << ": " << key << ": " << what;
        throw InputError(os.str());
    }

    const std::string& raw(const std::string& key) {
        used_.insert(key);
        return kv_.at(key).value;
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return parse_number(key, raw(key));
    }

    long integer(const std::string& key, long fallback) {
        if (!has(key)) return fallback;
        const std::string& s = raw(key);
        long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) fail(key, "expected an integer, got '" + s + "'");
        return v;
    }

    std::string word(const std::string& key, const std::string& fallback, std::initializer_list<const char*> allowed) {
        if (!has(key)) return fallback;
        const std::string s = boost::algorithm::to_lower_copy(raw(key));
        for (const char* a : allowed)
            if (s == a) return s;
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        fail(key, "expected one of " + list + ", got '" + s + "'");
    }

    std::vector<double> list(const std::string& key) {
        std::vector<std::string> parts;
        const std::string s = raw(key);
        boost::algorithm::split(parts, s, boost::is_any_of(","));
        std::vector<double> out;
        for (auto& p : parts) {
            boost::algorithm::trim(p);
            if (p.empty()) fail(key, "empty list item");
            out.push_back(parse_number(key, p));
        }
        return out;
    }

    std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& [k, e] : kv_)
            if (boost::algorithm::starts_with(k, prefix)) out.push_back(k);
        return out;
    }

    void check_all_used() const {
        for (const auto& [k, e] : kv_)
            if (!used_.count(k)) {
                std::ostringstream os;
                os << source_ << ':' << e.line << ": unknown key '" << k << "'";
                throw InputError(os.str());
            }
    }

private:
    double parse_number(const std::string& key, const std::string& s) const {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
            fail(key, "expected a number, got '" + s + "'");
        return v;
    }

    std::map<std::string, Entry> kv_;
    std::set<std::string> used_;
    std::string source_;
};

Region read_region(Fields& f, const std::string& prefix, int dim, const Region& fallback) {
    const bool lo = f.has(prefix + ".lo"), hi = f.has(prefix + ".hi");
    if (!lo && !hi) return fallback;
    if (lo != hi) f.fail(prefix + (lo ? ".hi" : ".lo"), "missing; both bounds are required");
    const auto a = f.list(prefix + ".lo"), b = f.list(prefix + ".hi");
    if (static_cast<int>(a.size()) != dim) f.fail(prefix + ".lo", "expected " + std::to_string(dim) + " values");
    if (static_cast<int>(b.size()) != dim) f.fail(prefix + ".hi", "expected " + std::to_string(dim) + " values");
    try {
        return dim == 1 ? Region::interval(a[0], b[0]) : Region::box(a[0], b[0], a[1], b[1]);
    } catch (const Error& e) {
        f.fail(prefix + ".lo", e.what());
    }
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

// Analytic catalog: one-dimensional profile and its derivative.
struct Profile {
    std::function<double(double)> f, df;
};

Profile profile(const std::string& name) {
    if (name == "poly_sq")
        return {[](double y) { return y * y * (1 - y) * (1 - y); },
                [](double y) { return 2 * y * (1 - y) * (1 - 2 * y); }};
    // (cos sin)^2 = sin^2(2 pi y) / 4
    return {[](double y) { return 0.25 * std::pow(std::sin(2 * kPi * y), 2); },
            [](double y) { return 0.5 * kPi * std::sin(4 * kPi * y); }};
}

}  // namespace

RunConfig RunConfig::parse(std::istream& is, const std::string& source) {
    std::map<std::string, Entry> kv;
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        boost::algorithm::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(source + ":" + std::to_string(n) + ": expected 'key = value'");
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        boost::algorithm::trim(key);
        boost::algorithm::trim(value);
        boost::algorithm::to_lower(key);
        if (key.empty()) throw InputError(source + ":" + std::to_string(n) + ": empty key");
        // sensor.kind is shorthand for sensor.1.kind
        if (boost::algorithm::starts_with(key, "sensor.")) {
            const std::string rest = key.substr(7);
            if (rest.empty() || !std::isdigit(static_cast<unsigned char>(rest[0]))) key = "sensor.1." + rest;
        }
        if (kv.count(key)) throw InputError(source + ":" + std::to_string(n) + ": duplicate key '" + key + "'");
        kv[key] = {value, n};
    }

    Fields f(std::move(kv), source);
    RunConfig c;
    const std::string dom = f.word("domain", "1d", {"1d", "2d"});
    c.dim = dom == "1d" ? 1 : 2;
    c.alpha = f.number("alpha", c.alpha);
    c.T = f.number("t", c.T);
    c.M = static_cast<int>(f.integer("m", c.M));
    c.state_modes = static_cast<int>(f.integer("state_modes", c.state_modes));
    c.omega = read_region(f, "omega", c.dim, Region::whole(c.domain()));

    std::set<int> ids;
    for (const auto& k : f.keys_with_prefix("sensor.")) {
        const auto dot = k.find('.', 7);
        const std::string id = k.substr(7, dot == std::string::npos ? std::string::npos : dot - 7);
        int v = 0;
        auto [p, ec] = std::from_chars(id.data(), id.data() + id.size(), v);
        if (ec != std::errc() || p != id.data() + id.size() || v < 1) f.fail(k, "sensor index must be a positive integer");
        ids.insert(v);
    }
    int expect = 1;
    for (int id : ids) {
        const std::string pre = "sensor." + std::to_string(id);
        if (id != expect++) f.fail(pre + ".kind", "sensor indices must run 1, 2, 3, ...");
        SensorSpec s;
        if (!f.has(pre + ".kind")) f.fail(pre + ".kind", "missing");
        s.kind = f.word(pre + ".kind", "", {"pointwise", "zonal"}) == "zonal" ? Sensor::Kind::zonal
                                                                              : Sensor::Kind::pointwise;
        if (s.kind == Sensor::Kind::pointwise) {
            if (!f.has(pre + ".location")) f.fail(pre + ".location", "missing");
            const auto loc = f.list(pre + ".location");
            if (static_cast<int>(loc.size()) != c.dim)
                f.fail(pre + ".location", "expected " + std::to_string(c.dim) + " values");
            s.location = {loc[0], c.dim == 2 ? loc[1] : 0.0};
        } else {
            if (!f.has(pre + ".support.lo")) f.fail(pre + ".support.lo", "missing");
            s.support = read_region(f, pre + ".support", c.dim, Region{});
            s.weight = f.word(pre + ".weight", "constant", {"constant", "product_trig"});
            s.weight_scale = f.number(pre + ".weight.scale", 1.0);
            if (f.has(pre + ".weight.freq")) {
                const auto fr = f.list(pre + ".weight.freq");
                if (static_cast<int>(fr.size()) != c.dim)
                    f.fail(pre + ".weight.freq", "expected " + std::to_string(c.dim) + " values");
                s.weight_freq = {fr[0], c.dim == 2 ? fr[1] : s.weight_freq[1]};
            }
        }
        c.sensors.push_back(s);
    }

    c.initial_state = f.word("initial_state", c.initial_state, {"poly_sq", "trig_sq", "custom", "zero"});
    if (f.has("initial_state.coefficients")) c.coefficients = f.list("initial_state.coefficients");
    if (c.initial_state == "custom" && c.coefficients.empty())
        f.fail("initial_state.coefficients", "required for a custom initial state");
    c.time_nodes = static_cast<int>(f.integer("time.nodes", c.time_nodes));
    c.noise_sigma = f.number("noise_sigma", c.noise_sigma);
    const long seed = f.integer("seed", static_cast<long>(c.seed));
    if (seed < 0) f.fail("seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);

    const std::string reg = f.word("regularization", "tikhonov", {"none", "tikhonov", "truncated_svd"});
    const double rv = f.number("regularization.value", reg == "truncated_svd" ? 1e-12 : 0.0);
    c.regularization = reg == "none"       ? Regularization::none()
                       : reg == "tikhonov" ? Regularization::tikhonov(rv)
                                           : Regularization::truncated_svd(rv);
    c.epsilon = f.number("epsilon", c.epsilon);
    c.policy.max_iterations = static_cast<int>(f.integer("policy.max_iterations", c.policy.max_iterations));
    c.policy.m_step = static_cast<int>(f.integer("policy.m_step", c.policy.m_step));
    c.policy.m_max = static_cast<int>(f.integer("policy.m_max", c.policy.m_max));
    c.policy.relax_factor = f.number("policy.relax_factor", c.policy.relax_factor);
    c.adjoint = f.word("adjoint", "potential", {"potential", "divergence"}) == "potential"
                    ? AdjointConvention::potential
                    : AdjointConvention::divergence;
    c.assembly = f.word("assembly", "global", {"global", "restricted"}) == "global" ? AssemblyMode::global
                                                                                     : AssemblyMode::restricted;
    c.strategic_tolerance = f.number("strategic.tolerance", c.strategic_tolerance);
    if (f.has("output_dir")) c.output_dir = f.raw("output_dir");
    f.check_all_used();

    try {
        c.validate();
    } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    return parse(in, path);
}

void RunConfig::validate() const {
    auto bad = [](const std::string& key, const std::string& what) { throw InputError(key + ": " + what); };
    if (!(alpha > 0.0 && alpha <= 1.0)) bad("alpha", "must lie in (0,1]");
    if (!(T > 0.0)) bad("T", "must be positive");
    if (M < 1) bad("M", "must be at least 1");
    if (state_modes < 1) bad("state_modes", "must be at least 1");
    if (time_nodes < 2) bad("time.nodes", "must be at least 2");
    if (!(noise_sigma >= 0.0)) bad("noise_sigma", "must be non-negative");
    if (!(epsilon > 0.0)) bad("epsilon", "must be positive");
    if (!(strategic_tolerance > 0.0)) bad("strategic.tolerance", "must be positive");
    if (sensors.empty()) bad("sensor", "at least one sensor is required");
    if (policy.max_iterations < 1) bad("policy.max_iterations", "must be at least 1");
    if (policy.m_step < 0) bad("policy.m_step", "must be non-negative");
    if (!(policy.relax_factor > 0.0)) bad("policy.relax_factor", "must be positive");
    if (regularization.kind == RegularizationKind::truncated_svd && !(regularization.value > 0.0))
        bad("regularization.value", "rcond must be positive");
    if (regularization.kind == RegularizationKind::tikhonov && regularization.value < 0.0)
        bad("regularization.value", "mu must be non-negative (0 selects the default)");
    if (initial_state == "custom" && static_cast<int>(coefficients.size()) > state_modes)
        bad("initial_state.coefficients", "more coefficients than state_modes");
    const auto s = build_sensors();
    for (std::size_t i = 0; i < s.size(); ++i) {
        try {
            s[i].validate(domain());
        } catch (const Error& e) {
            bad("sensor." + std::to_string(i + 1), e.what());
        }
    }
}

ScalarField weight_function(const SensorSpec& spec, int dim) {
    const double c = spec.weight_scale;
    if (spec.weight == "constant") return [c](const Point&) { return c; };
    const auto fr = spec.weight_freq;
    if (dim == 1) return [c, fr](const Point& p) { return c * std::cos(fr[0] * kPi * p[0]); };
    return [c, fr](const Point& p) { return c * std::cos(fr[0] * kPi * p[0]) * std::sin(fr[1] * kPi * p[1]); };
}

FractionalDiffusion RunConfig::system() const { return FractionalDiffusion::make(alpha, domain(), T, state_modes); }

std::vector<Sensor> RunConfig::build_sensors() const {
    std::vector<Sensor> out;
    for (const auto& s : sensors) {
        if (s.kind == Sensor::Kind::pointwise)
            out.push_back(Sensor::pointwise(s.location, dim));
        else
            out.push_back(Sensor::zonal(s.support, weight_function(s, dim), s.weight));
    }
    return out;
}

TimeGrid RunConfig::time_grid() const { return TimeGrid::uniform(T, time_nodes, alpha); }

HumProblem RunConfig::problem() const {
    HumProblem p;
    p.sys = system();
    p.M = M;
    p.omega = omega;
    p.sensors = build_sensors();
    p.regularization = regularization;
    p.epsilon = epsilon;
    p.assembly = assembly;
    p.adjoint = adjoint;
    p.policy = policy;
    return p;
}

ScalarField RunConfig::initial_state_field() const {
    if (initial_state == "zero") return [](const Point&) { return 0.0; };
    if (initial_state == "custom") {
        const auto modes = eigenpairs(domain(), static_cast<int>(coefficients.size()));
        const auto a = coefficients;
        return [modes, a](const Point& p) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * eval_eigfun(modes[k], p);
            return s;
        };
    }
    const Profile pr = profile(initial_state);
    if (dim == 1) return [pr](const Point& p) { return pr.f(p[0]); };
    return [pr](const Point& p) { return pr.f(p[0]) * pr.f(p[1]); };
}

ModalState RunConfig::initial_modal_state() const {
    const auto sys = system();
    if (initial_state == "zero") return {Eigen::VectorXd::Zero(sys.size())};
    if (initial_state == "custom") {
        ModalState m{Eigen::VectorXd::Zero(sys.size())};
        for (std::size_t k = 0; k < coefficients.size(); ++k) m.coefficients[k] = coefficients[k];
        return m;
    }
    return project_initial_state(sys, initial_state_field());
}

VectorField RunConfig::truth_gradient() const {
    if (initial_state == "zero") return [](const Point&) { return Vec2{0.0, 0.0}; };
    if (initial_state == "custom") {
        const auto modes = eigenpairs(domain(), static_cast<int>(coefficients.size()));
        const auto a = coefficients;
        return [modes, a](const Point& p) {
            Vec2 v{0.0, 0.0};
            for (std::size_t k = 0; k < a.size(); ++k) {
                const Vec2 g = eval_eigfun_grad(modes[k], p);
                v[0] += a[k] * g[0];
                v[1] += a[k] * g[1];
            }
            return v;
        };
    }
    const Profile pr = profile(initial_state);
    if (dim == 1) return [pr](const Point& p) { return Vec2{pr.df(p[0]), 0.0}; };
    return [pr](const Point& p) {
        return Vec2{pr.df(p[0]) * pr.f(p[1]), pr.f(p[0]) * pr.df(p[1])};
    };
}

std::string RunConfig::canonical() const {
    std::map<std::string, std::string> kv;
    auto num = [](double v) {
        std::ostringstream os;
        os << std::setprecision(17) << v;
        return os.str();
    };
    auto lohi = [&](const std::string& pre, const Region& r) {
        std::vector<double> lo{r.lo[0]}, hi{r.hi[0]};
        if (dim == 2) {
            lo.push_back(r.lo[1]);
            hi.push_back(r.hi[1]);
        }
        kv[pre + ".lo"] = join(lo);
        kv[pre + ".hi"] = join(hi);
    };
    kv["domain"] = dim == 1 ? "1d" : "2d";
    kv["alpha"] = num(alpha);
    kv["t"] = num(T);
    kv["m"] = std::to_string(M);
    kv["state_modes"] = std::to_string(state_modes);
    lohi("omega", omega);
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        const auto& s = sensors[i];
        const std::string pre = "sensor." + std::to_string(i + 1);
        if (s.kind == Sensor::Kind::pointwise) {
            kv[pre + ".kind"] = "pointwise";
            kv[pre + ".location"] = dim == 1 ? join({s.location[0]}) : join({s.location[0], s.location[1]});
        } else {
            kv[pre + ".kind"] = "zonal";
            lohi(pre + ".support", s.support);
            kv[pre + ".weight"] = s.weight;
            kv[pre + ".weight.scale"] = num(s.weight_scale);
            if (s.weight == "product_trig")
                kv[pre + ".weight.freq"] = dim == 1 ? join({s.weight_freq[0]}) : join({s.weight_freq[0], s.weight_freq[1]});
        }
    }
    kv["initial_state"] = initial_state;
    if (!coefficients.empty()) kv["initial_state.coefficients"] = join(coefficients);
    kv["time.nodes"] = std::to_string(time_nodes);
    kv["noise_sigma"] = num(noise_sigma);
    kv["seed"] = std::to_string(seed);
    kv["regularization"] = regularization.kind == RegularizationKind::none       ? "none"
                           : regularization.kind == RegularizationKind::tikhonov ? "tikhonov"
                                                                                 : "truncated_svd";
    kv["regularization.value"] = num(regularization.value);
    kv["epsilon"] = num(epsilon);
    kv["policy.max_iterations"] = std::to_string(policy.max_iterations);
    kv["policy.m_step"] = std::to_string(policy.m_step);
    kv["policy.m_max"] = std::to_string(policy.m_max);
    kv["policy.relax_factor"] = num(policy.relax_factor);
    kv["adjoint"] = adjoint == AdjointConvention::potential ? "potential" : "divergence";
    kv["assembly"] = assembly == AssemblyMode::global ? "global" : "restricted";
    kv["strategic.tolerance"] = num(strategic_tolerance);
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
    return os.str();
}

std::string RunConfig::fingerprint() const {
    // FNV-1a over the canonical text; stable across platforms and builds.
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace fracgrad
