#pragma once
// YAML run configuration with line-anchored errors.

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "pressdim/hyperbolic.hpp"
#include "pressdim/interval_partition.hpp"
#include "pressdim/numeric.hpp"

namespace pressdim::cli {

/// Message already carries "file:line: ".
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Config {
public:
    Config() = default;

    static Config load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError(path + ": cannot open config file");
        std::ostringstream ss;
        ss << in.rdbuf();
        Config c;
        c.path_ = path;
        c.text_ = ss.str();
        try {
            c.root_ = YAML::Load(c.text_);
        } catch (const YAML::ParserException& e) {
            throw ConfigError(path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
        }
        if (c.root_.IsNull()) c.root_ = YAML::Node(YAML::NodeType::Map);
        if (!c.root_.IsMap()) c.fail(c.root_, "top level must be a mapping");
        c.check_keys(c.root_, {"partition", "pressure", "bowen", "tolerance", "boxdim", "gaps", "group", "orbit",
                               "poincare", "counting", "selftest", "verify"});
        return c;
    }

    const YAML::Node& root() const { return root_; }
    const std::string& path() const { return path_; }
    std::uint64_t hash() const { return fnv1a(text_); }
    std::string hash_hex() const {
        std::ostringstream os;
        os << std::hex;
        os.width(16);
        os.fill('0');
        os << hash();
        return os.str();
    }

    [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
        const int line = node.Mark().line >= 0 ? node.Mark().line + 1 : 1;
        throw ConfigError(path_ + ":" + std::to_string(line) + ": " + msg);
    }

    void check_keys(const YAML::Node& map, const std::set<std::string>& allowed) const {
        if (!map.IsMap()) fail(map, "expected a mapping");
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "'");
        }
    }

    YAML::Node section(const std::string& name, const std::set<std::string>& allowed) const {
        YAML::Node n = root_[name];
        if (!n) return YAML::Node(YAML::NodeType::Map);
        if (n.IsNull()) return YAML::Node(YAML::NodeType::Map);
        check_keys(n, allowed);
        return n;
    }

    YAML::Node require(const std::string& name, const std::set<std::string>& allowed) const {
        if (!root_[name]) fail(root_, "missing section '" + name + "'");
        return section(name, allowed);
    }

    template <class T>
    T get(const YAML::Node& parent, const std::string& key, const T& def) const {
        const YAML::Node n = parent[key];
        if (!n) return def;
        return as<T>(n, key);
    }

    template <class T>
    T need(const YAML::Node& parent, const std::string& key) const {
        const YAML::Node n = parent[key];
        if (!n) fail(parent, "missing key '" + key + "'");
        return as<T>(n, key);
    }

    template <class T>
    T as(const YAML::Node& n, const std::string& what) const {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + what + "' has the wrong type");
        }
    }

private:
    std::string path_;
    std::string text_;
    YAML::Node root_;
};

struct PartitionConfig {
    GeneratorSpec spec;
    std::int64_t truncation = 1000;
};

inline PartitionConfig parse_partition(const Config& c) {
    const YAML::Node n = c.require("partition", {"generator", "truncation", "digits", "exponent", "rule", "p", "q",
                                                 "shift", "intervals"});
    PartitionConfig pc;
    const YAML::Node gen = n["generator"];
    if (!gen) c.fail(n, "missing key 'generator'");
    const auto name = c.as<std::string>(gen, "generator");
    pc.truncation = c.get<std::int64_t>(n, "truncation", 1000);
    if (name == "gauss") {
        pc.spec = GeneratorSpec::gauss();
    } else if (name == "dyadic") {
        pc.spec = GeneratorSpec::dyadic();
    } else if (name == "gauss-restricted") {
        pc.spec = GeneratorSpec::gauss_restricted(c.need<std::vector<int>>(n, "digits"));
    } else if (name == "power-law") {
        pc.spec = GeneratorSpec::power_law(c.need<double>(n, "exponent"));
    } else if (name == "custom-lengths") {
        pc.spec = GeneratorSpec::custom(c.need<std::string>(n, "rule"));
        pc.spec.p = c.get<double>(n, "p", 0.0);
        pc.spec.q = c.get<double>(n, "q", 0.0);
        pc.spec.shift = c.get<double>(n, "shift", 0.0);
    } else if (name == "explicit-list") {
        const YAML::Node iv = n["intervals"];
        if (!iv || !iv.IsSequence()) c.fail(iv ? iv : n, "explicit-list needs a sequence 'intervals' of [a, b] pairs");
        std::vector<std::pair<double, double>> list;
        for (const auto& e : iv) {
            if (!e.IsSequence() || e.size() != 2) c.fail(e, "each interval must be a pair [a, b]");
            list.emplace_back(c.as<double>(e[0], "a"), c.as<double>(e[1], "b"));
        }
        pc.spec = GeneratorSpec::explicit_list(std::move(list));
        if (!n["truncation"]) pc.truncation = static_cast<std::int64_t>(pc.spec.intervals.size());
    } else {
        c.fail(gen, "unknown generator '" + name +
                        "' (expected gauss, gauss-restricted, dyadic, power-law, custom-lengths, explicit-list)");
    }
    return pc;
}

struct GroupConfig {
    ParabolicGroupSpec group;
    BoundaryPoint xi;
    bool xi_at_infinity = false;
};

inline GroupConfig parse_group(const Config& c) {
    const YAML::Node n = c.require("group", {"n", "alphas", "xi"});
    const int dim = c.need<int>(n, "n");
    const YAML::Node al = n["alphas"];
    if (!al || !al.IsSequence()) c.fail(al ? al : n, "'alphas' must be a sequence of vectors");
    std::vector<Vec> alphas;
    for (const auto& a : al) {
        const auto v = c.as<std::vector<double>>(a, "alpha");
        Vec e(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) e(static_cast<Eigen::Index>(i)) = v[i];
        alphas.push_back(e);
    }
    GroupConfig g;
    g.group = ParabolicGroupSpec{dim, static_cast<int>(alphas.size()), std::move(alphas)};
    try {
        g.group.validate();
    } catch (const ValidationError& e) {
        c.fail(n, e.what());
    }
    const YAML::Node xn = n["xi"];
    if (xn && xn.IsScalar() && xn.as<std::string>() == "infinity") {
        g.xi = BoundaryPoint::infinity(dim);
        g.xi_at_infinity = true;
    } else {
        const auto v = xn ? c.as<std::vector<double>>(xn, "xi") : std::vector<double>(dim - 1, 0.0);
        if (static_cast<int>(v.size()) != dim - 1) c.fail(xn ? xn : n, "'xi' needs n-1 coordinates or 'infinity'");
        Vec u(dim - 1);
        for (int i = 0; i < dim - 1; ++i) u(i) = v[i];
        g.xi = BoundaryPoint::plane(u);
    }
    return g;
}

}  // namespace pressdim::cli
