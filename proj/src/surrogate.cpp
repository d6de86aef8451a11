#include "ocprom/surrogate.hpp"

#include "ocprom/binio.hpp"

#include <cmath>

namespace ocprom {

namespace {

constexpr char kMagic[8] = {'O', 'C', 'P', 'M', 'O', 'D', 'L', '1'};

}  // namespace

Eigen::Index reducer_latent_dim(const Reducer& r)
{
    return std::visit(
        [](const auto& x) -> Eigen::Index {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, PodBasis>)
                return x.n;
            else
                return x.latent_dim;
        },
        r);
}

Vector reducer_encode(const Reducer& r, const Vector& x_full)
{
    return std::visit(
        [&](const auto& red) -> Vector {
            using T = std::decay_t<decltype(red)>;
            if constexpr (std::is_same_v<T, PodBasis>)
                return red.project(x_full);
            else
                return red.encode(x_full);
        },
        r);
}

Vector reducer_decode(const Reducer& r, const Vector& latent)
{
    return std::visit(
        [&](const auto& red) -> Vector {
            using T = std::decay_t<decltype(red)>;
            if constexpr (std::is_same_v<T, PodBasis>)
                return red.lift(latent);
            else
                return red.decode(latent);
        },
        r);
}

DenseMatrix reducer_encode_columns(const Reducer& r, const DenseMatrix& x)
{
    return std::visit(
        [&](const auto& red) -> DenseMatrix {
            using T = std::decay_t<decltype(red)>;
            if constexpr (std::is_same_v<T, PodBasis>)
                return red.project_columns(x);
            else
                return red.encode_columns(x);
        },
        r);
}

DenseMatrix reducer_decode_columns(const Reducer& r, const DenseMatrix& z)
{
    return std::visit(
        [&](const auto& red) -> DenseMatrix {
            using T = std::decay_t<decltype(red)>;
            if constexpr (std::is_same_v<T, PodBasis>)
                return red.lift_columns(z);
            else
                return red.decode_columns(z);
        },
        r);
}

Vector augment_features(const Scenario& mu, const std::vector<std::string>& features)
{
    Vector out(mu.params.size() + static_cast<Eigen::Index>(features.size()));
    out.head(mu.params.size()) = mu.params;
    Eigen::Index pos = mu.params.size();
    for (const auto& f : features) {
        if (f == "r_cos_theta")
            out[pos++] = mu.r() * std::cos(mu.theta());
        else if (f == "r_sin_theta")
            out[pos++] = mu.r() * std::sin(mu.theta());
        else
            throw std::invalid_argument("augment_features: unknown feature '" + f + "'");
    }
    return out;
}

void RomModel::validate() const
{
    phi.validate();
    if (phi.output_dim() != latent_y() + latent_u())
        throw std::invalid_argument("RomModel: phi output must equal N_y + N_u");
}

Vector rom_input(const RomModel& rom, std::optional<double> t, const Scenario& mu)
{
    if (rom.input.uses_time != t.has_value())
        throw std::invalid_argument(rom.input.uses_time
                                        ? "rom_input: model expects a time value"
                                        : "rom_input: model takes no time value");
    Vector raw = augment_features(mu, rom.input.features);
    if (rom.input.uses_time) {
        Vector with_time(raw.size() + 1);
        with_time.head(raw.size()) = raw;
        with_time[raw.size()] = *t;
        raw = std::move(with_time);
    }
    return rom.input.scaler.apply(raw);
}

DenseMatrix rom_training_inputs(const RomModel& rom, const SnapshotSet& set)
{
    const Eigen::Index m = set.columns();
    const Eigen::Index base = set.scenarios[0].params.size() +
                              static_cast<Eigen::Index>(rom.input.features.size());
    DenseMatrix raw(base + (rom.input.uses_time ? 1 : 0), m);
    for (Eigen::Index c = 0; c < m; ++c) {
        const auto& s = set.scenarios[static_cast<size_t>(c)];
        raw.col(c).head(base) = augment_features(s, rom.input.features);
        if (rom.input.uses_time) {
            if (!s.time)
                throw std::invalid_argument("rom_training_inputs: snapshot lacks a time stamp");
            raw(base, c) = *s.time;
        }
    }
    return raw;
}

DenseMatrix rom_latent_targets(const RomModel& rom, const SnapshotSet& set)
{
    const DenseMatrix ylat = reducer_encode_columns(rom.state_reducer, set.y);
    const DenseMatrix ulat = reducer_encode_columns(rom.control_reducer, set.u);
    DenseMatrix targets(ylat.rows() + ulat.rows(), set.columns());
    targets.topRows(ylat.rows()) = ylat;
    targets.bottomRows(ulat.rows()) = ulat;
    return targets;
}

double phi_loss_and_gradient(const RomModel& rom, const DenseMatrix& inputs,
                             const DenseMatrix& latent_targets, Vector& grad_out)
{
    const double ny = static_cast<double>(rom.latent_y());
    const double nu = static_cast<double>(rom.latent_u());
    Vector w(rom.latent_y() + rom.latent_u());
    w.head(rom.latent_y()).setConstant(ny / (ny + nu));
    w.tail(rom.latent_u()).setConstant(nu / (ny + nu));
    grad_out.resize(rom.phi.parameter_count());
    return weighted_mse_and_gradient(rom.phi, inputs, latent_targets, w, grad_out);
}

PhiTrainReport phi_train(RomModel& rom, const SnapshotSet& train, const OptimizerConfig& cfg,
                         std::uint64_t seed)
{
    train.validate();
    const DenseMatrix raw = rom_training_inputs(rom, train);
    rom.input.scaler.fit(raw);
    const DenseMatrix inputs = rom.input.scaler.apply(raw);
    const DenseMatrix raw_targets = rom_latent_targets(rom, train);
    rom.latent_scaler.fit(raw_targets);
    const DenseMatrix targets = rom.latent_scaler.apply(raw_targets);
    if (rom.phi.input_dim() != inputs.rows())
        throw std::invalid_argument("phi_train: phi input dimension mismatch");
    rom.validate();

    RomModel& model = rom;
    const Objective objective = [&](const Vector& params, Vector& grad) {
        model.phi.set_parameters(params);
        return phi_loss_and_gradient(model, inputs, targets, grad);
    };

    MinimizeResult res;
    try {
        res = minimize(objective, rom.phi.flatten_parameters(), cfg);
    } catch (const OptimizeError& e) {
        throw std::runtime_error(std::string("phi_train: ") + e.what());
    }
    rom.phi.set_parameters(res.x);

    rom.manifest.training_dataset_id = train.provenance.dataset_id;
    rom.manifest.training_columns = train.provenance.column_origin;
    rom.manifest.seed = seed;

    PhiTrainReport report;
    report.loss_history = std::move(res.history);
    report.converged = res.converged;
    return report;
}

RomPrediction rom_predict(const RomModel& rom, std::optional<double> t, const Scenario& mu)
{
    const Vector input = rom_input(rom, t, mu);
    const Vector latent = rom.latent_scaler.unapply(Vector(rom.phi.forward(input)));
    RomPrediction out;
    out.y = reducer_decode(rom.state_reducer, latent.head(rom.latent_y()));
    out.u = reducer_decode(rom.control_reducer, latent.tail(rom.latent_u()));
    out.extrapolated = rom.box.dim() > 0 && !rom.box.contains(mu.params);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization ("OCPMODL1" container)

namespace {

void write_vector(ByteWriter& w, const Vector& v)
{
    w.write_u32(static_cast<std::uint32_t>(v.size()));
    w.write_f64_array(v.data(), static_cast<size_t>(v.size()));
}

Vector read_vector(ByteReader& r)
{
    Vector v(r.read_u32());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = r.read_f64();
    return v;
}

void write_mlp(ByteWriter& w, const Mlp& net)
{
    w.write_u32(static_cast<std::uint32_t>(net.weights.size()));
    w.write_f64(net.leaky_slope);
    for (size_t l = 0; l < net.weights.size(); ++l) {
        const auto& wl = net.weights[l];
        w.write_u32(static_cast<std::uint32_t>(wl.rows()));
        w.write_u32(static_cast<std::uint32_t>(wl.cols()));
        for (Eigen::Index i = 0; i < wl.rows(); ++i)        // row-major on disk
            for (Eigen::Index j = 0; j < wl.cols(); ++j) w.write_f64(wl(i, j));
        w.write_f64_array(net.biases[l].data(), static_cast<size_t>(net.biases[l].size()));
        w.write_u32(static_cast<std::uint32_t>(net.activations[l]));
    }
}

Mlp read_mlp(ByteReader& r)
{
    Mlp net;
    const std::uint32_t layers = r.read_u32();
    net.leaky_slope = r.read_f64();
    for (std::uint32_t l = 0; l < layers; ++l) {
        const std::uint32_t rows = r.read_u32();
        const std::uint32_t cols = r.read_u32();
        DenseMatrix wl(rows, cols);
        for (std::uint32_t i = 0; i < rows; ++i)
            for (std::uint32_t j = 0; j < cols; ++j) wl(i, j) = r.read_f64();
        net.weights.push_back(std::move(wl));
        Vector b(rows);
        for (std::uint32_t i = 0; i < rows; ++i) b[i] = r.read_f64();
        net.biases.push_back(std::move(b));
        net.activations.push_back(static_cast<Activation>(r.read_u32()));
    }
    net.validate();
    return net;
}

void write_pod(ByteWriter& w, const PodBasis& basis)
{
    w.write_u32(static_cast<std::uint32_t>(basis.v.rows()));
    w.write_u32(static_cast<std::uint32_t>(basis.n));
    w.write_f64_array(basis.v.data(), static_cast<size_t>(basis.v.size()));
    write_vector(w, basis.singular_values);
}

PodBasis read_pod(ByteReader& r)
{
    PodBasis basis;
    const std::uint32_t rows = r.read_u32();
    basis.n = r.read_u32();
    basis.v.resize(rows, basis.n);
    for (Eigen::Index i = 0; i < basis.v.size(); ++i) basis.v.data()[i] = r.read_f64();
    basis.singular_values = read_vector(r);
    return basis;
}

void write_scaler(ByteWriter& w, const FeatureScaler& s)
{
    write_vector(w, s.lo);
    write_vector(w, s.hi);
}

FeatureScaler read_scaler(ByteReader& r)
{
    FeatureScaler s;
    s.lo = read_vector(r);
    s.hi = read_vector(r);
    return s;
}

void write_reducer(ByteWriter& w, const Reducer& red)
{
    if (std::holds_alternative<PodBasis>(red)) {
        w.write_u32(0);
        write_pod(w, std::get<PodBasis>(red));
    } else {
        w.write_u32(1);
        const auto& ae = std::get<Autoencoder>(red);
        w.write_u32(static_cast<std::uint32_t>(ae.mode));
        w.write_u32(static_cast<std::uint32_t>(ae.latent_dim));
        w.write_u32(ae.basis ? 1 : 0);
        if (ae.basis) write_pod(w, *ae.basis);
        write_scaler(w, ae.scaler);
        write_mlp(w, ae.encoder);
        write_mlp(w, ae.decoder);
    }
}

Reducer read_reducer(ByteReader& r)
{
    const std::uint32_t tag = r.read_u32();
    if (tag == 0) return read_pod(r);
    if (tag != 1)
        throw FileFormatError(FileFormatError::Kind::BadHeader, "unknown reducer tag");
    Autoencoder ae;
    ae.mode = static_cast<AeMode>(r.read_u32());
    ae.latent_dim = r.read_u32();
    if (r.read_u32()) ae.basis = read_pod(r);
    ae.scaler = read_scaler(r);
    ae.encoder = read_mlp(r);
    ae.decoder = read_mlp(r);
    ae.validate();
    return ae;
}

void write_string(ByteWriter& w, const std::string& s)
{
    w.write_u32(static_cast<std::uint32_t>(s.size()));
    w.write_bytes(s.data(), s.size());
}

std::string read_string(ByteReader& r)
{
    std::string s(r.read_u32(), '\0');
    if (!s.empty()) r.read_bytes(s.data(), s.size());
    return s;
}

}  // namespace

void save_model(const RomModel& rom, const std::string& path)
{
    rom.validate();
    ByteWriter w;
    w.write_bytes(kMagic, sizeof kMagic);
    w.write_u32(static_cast<std::uint32_t>(rom.kind));
    w.write_u32(rom.input.uses_time ? 1 : 0);
    w.write_u32(static_cast<std::uint32_t>(rom.input.features.size()));
    for (const auto& f : rom.input.features) write_string(w, f);
    write_scaler(w, rom.input.scaler);
    write_vector(w, rom.box.lo);
    write_vector(w, rom.box.hi);
    write_mlp(w, rom.phi);
    write_scaler(w, rom.latent_scaler);
    write_reducer(w, rom.state_reducer);
    write_reducer(w, rom.control_reducer);
    w.write_u64(rom.manifest.training_dataset_id);
    w.write_u64(rom.manifest.training_file_hash);
    w.write_u64(rom.manifest.seed);
    w.write_u32(static_cast<std::uint32_t>(rom.manifest.training_columns.size()));
    for (std::uint32_t c : rom.manifest.training_columns) w.write_u32(c);
    write_string(w, rom.manifest.config_json);

    Fnv1a checksum;
    checksum.update(w.bytes().data(), w.bytes().size());
    w.write_u64(checksum.digest());
    write_file_bytes(path, w.bytes());
}

RomModel load_model(const std::string& path)
{
    const auto bytes = read_file_bytes(path);
    if (bytes.size() < sizeof(kMagic) + 8)
        throw FileFormatError(FileFormatError::Kind::Truncated, "model file too short: " + path);
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw FileFormatError(FileFormatError::Kind::MagicMismatch,
                              "not a model file (bad magic): " + path);
    {
        Fnv1a checksum;
        checksum.update(bytes.data(), bytes.size() - 8);
        ByteReader tail(bytes.data() + bytes.size() - 8, 8);
        if (tail.read_u64() != checksum.digest())
            throw FileFormatError(FileFormatError::Kind::ChecksumMismatch,
                                  "model checksum mismatch: " + path);
    }

    ByteReader r(bytes.data() + sizeof kMagic, bytes.size() - sizeof kMagic - 8);
    RomModel rom;
    rom.kind = static_cast<RomKind>(r.read_u32());
    rom.input.uses_time = r.read_u32() != 0;
    const std::uint32_t nf = r.read_u32();
    for (std::uint32_t i = 0; i < nf; ++i) rom.input.features.push_back(read_string(r));
    rom.input.scaler = read_scaler(r);
    rom.box.lo = read_vector(r);
    rom.box.hi = read_vector(r);
    rom.phi = read_mlp(r);
    rom.latent_scaler = read_scaler(r);
    rom.state_reducer = read_reducer(r);
    rom.control_reducer = read_reducer(r);
    rom.manifest.training_dataset_id = r.read_u64();
    rom.manifest.training_file_hash = r.read_u64();
    rom.manifest.seed = r.read_u64();
    rom.manifest.training_columns.resize(r.read_u32());
    for (auto& c : rom.manifest.training_columns) c = r.read_u32();
    rom.manifest.config_json = read_string(r);
    rom.validate();
    return rom;
}

}  // namespace ocprom
