#include "ocprom/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ocprom {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

OptimizerConfig parse_optimizer(const json& obj, const std::string& where)
{
    reject_unknown(obj,
                   {"kind", "max_iterations", "gradient_tolerance", "step_size", "lbfgs_memory",
                    "adam_beta1", "adam_beta2", "adam_epsilon"},
                   where);
    OptimizerConfig cfg;
    if (obj.contains("kind")) {
        const std::string kind = obj.at("kind");
        if (kind == "lbfgs")
            cfg.kind = OptimizerKind::Lbfgs;
        else if (kind == "adam")
            cfg.kind = OptimizerKind::Adam;
        else
            throw std::invalid_argument("config: unknown optimizer kind '" + kind + "' in " +
                                        where);
    }
    if (obj.contains("max_iterations")) cfg.max_iterations = obj.at("max_iterations");
    if (obj.contains("gradient_tolerance")) cfg.gradient_tolerance = obj.at("gradient_tolerance");
    if (obj.contains("step_size")) cfg.step_size = obj.at("step_size");
    if (obj.contains("lbfgs_memory")) cfg.lbfgs_memory = obj.at("lbfgs_memory");
    if (obj.contains("adam_beta1")) cfg.adam_beta1 = obj.at("adam_beta1");
    if (obj.contains("adam_beta2")) cfg.adam_beta2 = obj.at("adam_beta2");
    if (obj.contains("adam_epsilon")) cfg.adam_epsilon = obj.at("adam_epsilon");
    cfg.validate();
    return cfg;
}

std::vector<Eigen::Index> parse_sizes(const json& arr, const std::string& where)
{
    if (!arr.is_array() || arr.size() < 2)
        throw std::invalid_argument("config: " + where + " must be an array of >= 2 sizes");
    std::vector<Eigen::Index> sizes;
    for (const auto& v : arr) {
        const long s = v;
        if (s < 1) throw std::invalid_argument("config: nonpositive layer size in " + where);
        sizes.push_back(s);
    }
    return sizes;
}

}  // namespace

void RunConfig::validate() const
{
    if (mesh_n < 16) throw std::invalid_argument("config: mesh_n must be >= 16");
    if (!(obstacle_radius > 0) || !(annulus_inner > obstacle_radius) ||
        !(annulus_outer > annulus_inner))
        throw std::invalid_argument("config: need 0 < obstacle_radius < annulus_inner < annulus_outer");
    if (!(beta > 0) || !(beta_g >= 0))
        throw std::invalid_argument("config: beta must be positive, beta_g nonnegative");
    box.validate();
    if (num_snapshots < 2) throw std::invalid_argument("config: num_snapshots must be >= 2");
    if (!(test_fraction > 0) || !(test_fraction < 1))
        throw std::invalid_argument("config: test_fraction must lie in (0, 1)");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (state_pod_rank < 1 || control_pod_rank < 1 || latent_state < 1)
        throw std::invalid_argument("config: ranks and latent dimension must be >= 1");
    if (kind != RomKind::PodNN) {
        if (ae_encoder.back() != latent_state || ae_decoder.front() != latent_state)
            throw std::invalid_argument(
                "config: autoencoder bottleneck must match latent_state");
        if (kind == RomKind::PodDlRom &&
            (ae_encoder.front() != state_pod_rank || ae_decoder.back() != state_pod_rank))
            throw std::invalid_argument(
                "config: POD+AE autoencoder width must match state_pod_rank");
    }
    ae_optimizer.validate();
    phi_optimizer.validate();
    for (const auto& f : phi_features)
        if (f != "r_cos_theta" && f != "r_sin_theta")
            throw std::invalid_argument("config: unknown phi feature '" + f + "'");
}

RunConfig parse_config(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
    reject_unknown(doc,
                   {"mesh", "physics", "cost", "parameter_box", "snapshots", "reduction", "phi",
                    "paths"},
                   "top level");

    RunConfig cfg;
    cfg.box.lo = Vector(2);
    cfg.box.hi = Vector(2);
    cfg.box.lo << -M_PI / 2, 0.4;
    cfg.box.hi << M_PI / 2, 0.9;

    if (doc.contains("mesh")) {
        const json& m = doc.at("mesh");
        reject_unknown(m, {"n", "obstacle_radius", "annulus_inner", "annulus_outer"}, "mesh");
        if (m.contains("n")) cfg.mesh_n = m.at("n");
        if (m.contains("obstacle_radius")) cfg.obstacle_radius = m.at("obstacle_radius");
        if (m.contains("annulus_inner")) cfg.annulus_inner = m.at("annulus_inner");
        if (m.contains("annulus_outer")) cfg.annulus_outer = m.at("annulus_outer");
    }
    if (doc.contains("physics")) {
        const json& p = doc.at("physics");
        reject_unknown(p, {"nu", "gamma", "y_ext"}, "physics");
        if (p.contains("nu")) cfg.nu = p.at("nu");
        if (p.contains("gamma")) cfg.gamma = p.at("gamma");
        if (p.contains("y_ext")) cfg.y_ext = p.at("y_ext");
    }
    if (doc.contains("cost")) {
        const json& c = doc.at("cost");
        reject_unknown(c, {"beta", "beta_g"}, "cost");
        if (c.contains("beta")) cfg.beta = c.at("beta");
        if (c.contains("beta_g")) cfg.beta_g = c.at("beta_g");
    }
    if (doc.contains("parameter_box")) {
        const json& b = doc.at("parameter_box");
        reject_unknown(b, {"lo", "hi"}, "parameter_box");
        if (b.contains("lo") != b.contains("hi"))
            throw std::invalid_argument("config: parameter_box needs both lo and hi");
        if (b.contains("lo")) {
            const auto& lo = b.at("lo");
            const auto& hi = b.at("hi");
            if (!lo.is_array() || !hi.is_array() || lo.size() != hi.size() || lo.empty())
                throw std::invalid_argument("config: parameter_box lo/hi must be equal-length arrays");
            cfg.box.lo = Vector(static_cast<Eigen::Index>(lo.size()));
            cfg.box.hi = Vector(static_cast<Eigen::Index>(hi.size()));
            for (size_t i = 0; i < lo.size(); ++i) {
                cfg.box.lo[static_cast<Eigen::Index>(i)] = lo[i];
                cfg.box.hi[static_cast<Eigen::Index>(i)] = hi[i];
            }
        }
    }
    if (doc.contains("snapshots")) {
        const json& s = doc.at("snapshots");
        reject_unknown(s, {"count", "test_fraction", "sample_seed", "split_seed", "workers"},
                       "snapshots");
        if (s.contains("count")) cfg.num_snapshots = s.at("count");
        if (s.contains("test_fraction")) cfg.test_fraction = s.at("test_fraction");
        if (s.contains("sample_seed")) cfg.sample_seed = s.at("sample_seed");
        if (s.contains("split_seed")) cfg.split_seed = s.at("split_seed");
        if (s.contains("workers")) cfg.workers = s.at("workers");
    }
    if (doc.contains("reduction")) {
        const json& r = doc.at("reduction");
        reject_unknown(r,
                       {"kind", "state_pod_rank", "control_pod_rank", "latent_state",
                        "ae_encoder", "ae_decoder", "ae_seed", "ae_optimizer"},
                       "reduction");
        if (r.contains("kind")) {
            const std::string kind = r.at("kind");
            if (kind == "pod_nn")
                cfg.kind = RomKind::PodNN;
            else if (kind == "dl_rom")
                cfg.kind = RomKind::DlRom;
            else if (kind == "pod_dl_rom")
                cfg.kind = RomKind::PodDlRom;
            else
                throw std::invalid_argument("config: unknown reduction kind '" + kind + "'");
        }
        if (r.contains("state_pod_rank")) cfg.state_pod_rank = r.at("state_pod_rank");
        if (r.contains("control_pod_rank")) cfg.control_pod_rank = r.at("control_pod_rank");
        if (r.contains("latent_state")) cfg.latent_state = r.at("latent_state");
        if (r.contains("ae_encoder")) cfg.ae_encoder = parse_sizes(r.at("ae_encoder"), "ae_encoder");
        if (r.contains("ae_decoder")) cfg.ae_decoder = parse_sizes(r.at("ae_decoder"), "ae_decoder");
        if (r.contains("ae_seed")) cfg.ae_seed = r.at("ae_seed");
        if (r.contains("ae_optimizer")) cfg.ae_optimizer = parse_optimizer(r.at("ae_optimizer"), "ae_optimizer");
    }
    if (doc.contains("phi")) {
        const json& p = doc.at("phi");
        reject_unknown(p, {"hidden", "features", "seed", "optimizer"}, "phi");
        if (p.contains("hidden")) {
            cfg.phi_hidden.clear();
            for (const auto& v : p.at("hidden")) {
                const long s = v;
                if (s < 1) throw std::invalid_argument("config: nonpositive phi hidden size");
                cfg.phi_hidden.push_back(s);
            }
        }
        if (p.contains("features")) {
            cfg.phi_features.clear();
            for (const auto& v : p.at("features")) cfg.phi_features.push_back(v);
        }
        if (p.contains("seed")) cfg.phi_seed = p.at("seed");
        if (p.contains("optimizer")) cfg.phi_optimizer = parse_optimizer(p.at("optimizer"), "phi optimizer");
    }
    if (doc.contains("paths")) {
        const json& p = doc.at("paths");
        reject_unknown(p, {"snapshots", "train", "test", "model"}, "paths");
        if (p.contains("snapshots")) cfg.snapshots_path = p.at("snapshots");
        if (p.contains("train")) cfg.train_path = p.at("train");
        if (p.contains("test")) cfg.test_path = p.at("test");
        if (p.contains("model")) cfg.model_path = p.at("model");
    }

    cfg.source_json = doc.dump(2);
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace ocprom
