#include "rflow/surrogate.hpp"

#include "rflow/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace rflow {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double geluDerivative(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
    const double pdf = std::exp(-0.5 * x * x) * (0.5 * M_2_SQRTPI * M_SQRT1_2);
    return cdf + x * pdf;
}

Normalization Normalization::identity(std::size_t dim) { return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)}; }

Normalization Normalization::fit(std::span<const double> data, std::size_t rows, std::size_t dim) {
    if (rows == 0 || data.size() != rows * dim) throw InvalidArgument("Normalization::fit: table shape mismatch");
    Normalization n{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < dim; ++j) n.mean[j] += data[r * dim + j];
    for (double& m : n.mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < dim; ++j) {
            double d = data[r * dim + j] - n.mean[j];
            n.std[j] += d * d;
        }
    for (std::size_t j = 0; j < dim; ++j) {
        double s = std::sqrt(n.std[j] / static_cast<double>(rows));
        // Relative spread below roundoff counts as constant.
        n.std[j] = s > 1e-12 * std::abs(n.mean[j]) ? s : std::max(std::abs(n.mean[j]), 1.0);
    }
    return n;
}

MlpNetwork::MlpNetwork(std::vector<DenseLayer> layers, Normalization input, Normalization output)
    : layers_(std::move(layers)), inputNorm_(std::move(input)), outputNorm_(std::move(output)) {
    validate();
}

MlpNetwork MlpNetwork::random(std::span<const std::size_t> widths, std::uint64_t seed) {
    if (widths.size() < 2) throw InvalidArgument("MlpNetwork::random: need at least input and output widths");
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        DenseLayer d{widths[l], widths[l + 1], std::vector<double>(widths[l] * widths[l + 1]),
                     std::vector<double>(widths[l + 1], 0.0)};
        std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(widths[l], 1))));
        for (double& w : d.weights) w = g(rng);
        layers.push_back(std::move(d));
    }
    return MlpNetwork(std::move(layers), Normalization::identity(widths.front()), Normalization::identity(widths.back()));
}

std::size_t MlpNetwork::parameterCount() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
}

void MlpNetwork::setNormalization(Normalization input, Normalization output) {
    inputNorm_ = std::move(input);
    outputNorm_ = std::move(output);
    validate();
}

void MlpNetwork::validate() const {
    if (layers_.empty()) throw InvalidArgument("MlpNetwork: no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const DenseLayer& d = layers_[l];
        if (d.inDim == 0 || d.outDim == 0) throw InvalidArgument("MlpNetwork: zero-width layer");
        if (d.weights.size() != d.inDim * d.outDim || d.bias.size() != d.outDim)
            throw InvalidArgument("MlpNetwork: layer " + std::to_string(l) + " storage does not match its dims");
        if (l > 0 && layers_[l - 1].outDim != d.inDim)
            throw InvalidArgument("MlpNetwork: layer " + std::to_string(l) + " does not chain with its predecessor");
    }
    auto check = [](const Normalization& n, std::size_t dim, const char* what) {
        if (n.mean.size() != dim || n.std.size() != dim) throw InvalidArgument(std::string("MlpNetwork: ") + what + " normalization has the wrong size");
        for (double s : n.std)
            if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument(std::string("MlpNetwork: ") + what + " std must be positive");
    };
    check(inputNorm_, inputDim(), "input");
    check(outputNorm_, outputDim(), "output");
}

namespace {

// Affine map of one row: out = W in + b.
void affine(const DenseLayer& d, const double* in, double* out) {
    for (std::size_t o = 0; o < d.outDim; ++o) {
        const double* w = d.weights.data() + o * d.inDim;
        double s = d.bias[o];
        for (std::size_t i = 0; i < d.inDim; ++i) s += w[i] * in[i];
        out[o] = s;
    }
}

std::size_t widest(const std::vector<DenseLayer>& layers) {
    std::size_t w = layers.front().inDim;
    for (const auto& l : layers) w = std::max(w, l.outDim);
    return w;
}

} // namespace

void MlpNetwork::forward(std::span<const double> x, std::size_t rows, std::span<double> y) const {
    const std::size_t in = inputDim(), out = outputDim();
    if (x.size() != rows * in) throw InvalidArgument("MlpNetwork::forward: input has " + std::to_string(x.size()) + " values, expected " + std::to_string(rows * in));
    if (y.size() != rows * out) throw InvalidArgument("MlpNetwork::forward: output buffer has the wrong size");
    const std::size_t w = widest(layers_);
    std::vector<double> a(w), b(w);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < in; ++i) a[i] = (x[r * in + i] - inputNorm_.mean[i]) / inputNorm_.std[i];
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            affine(layers_[l], a.data(), b.data());
            if (l + 1 < layers_.size())
                for (std::size_t o = 0; o < layers_[l].outDim; ++o) b[o] = gelu(b[o]);
            std::swap(a, b);
        }
        for (std::size_t o = 0; o < out; ++o) y[r * out + o] = a[o] * outputNorm_.std[o] + outputNorm_.mean[o];
    }
}

std::vector<double> MlpNetwork::forward(std::span<const double> x) const {
    std::vector<double> y(outputDim());
    forward(x, 1, y);
    return y;
}

std::vector<double> parameters(const MlpNetwork& net) {
    std::vector<double> theta;
    theta.reserve(net.parameterCount());
    for (const auto& l : net.layers()) {
        theta.insert(theta.end(), l.weights.begin(), l.weights.end());
        theta.insert(theta.end(), l.bias.begin(), l.bias.end());
    }
    return theta;
}

void setParameters(MlpNetwork& net, std::span<const double> theta) {
    if (theta.size() != net.parameterCount()) throw InvalidArgument("setParameters: wrong parameter count");
    std::size_t k = 0;
    for (auto& l : net.layers()) {
        for (double& w : l.weights) w = theta[k++];
        for (double& b : l.bias) b = theta[k++];
    }
}

double lossAndGradient(const MlpNetwork& net, std::span<const double> x, std::span<const double> y, std::size_t rows,
                       std::vector<double>& grad) {
    const auto& layers = net.layers();
    const std::size_t in = net.inputDim(), out = net.outputDim(), L = layers.size();
    if (rows == 0 || x.size() != rows * in || y.size() != rows * out) throw InvalidArgument("lossAndGradient: batch shape mismatch");
    const Normalization& ni = net.inputNorm();
    const Normalization& no = net.outputNorm();
    grad.assign(net.parameterCount(), 0.0);
    std::vector<std::size_t> offset(L);
    for (std::size_t l = 0, k = 0; l < L; ++l) {
        offset[l] = k;
        k += layers[l].weights.size() + layers[l].bias.size();
    }
    // acts[0] is the normalized input, acts[l + 1] the output of layer l, and
    // pre[l] its pre-activation.
    std::vector<std::vector<double>> acts(L + 1), pre(L);
    acts[0].resize(in);
    for (std::size_t l = 0; l < L; ++l) {
        acts[l + 1].resize(layers[l].outDim);
        pre[l].resize(layers[l].outDim);
    }
    const std::size_t w = widest(layers);
    std::vector<double> delta(w), prev(w);
    const double scale = 2.0 / static_cast<double>(rows * out);
    double loss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < in; ++i) acts[0][i] = (x[r * in + i] - ni.mean[i]) / ni.std[i];
        for (std::size_t l = 0; l < L; ++l) {
            affine(layers[l], acts[l].data(), pre[l].data());
            for (std::size_t o = 0; o < layers[l].outDim; ++o) acts[l + 1][o] = l + 1 < L ? gelu(pre[l][o]) : pre[l][o];
        }
        for (std::size_t o = 0; o < out; ++o) {
            double e = acts[L][o] - (y[r * out + o] - no.mean[o]) / no.std[o];
            loss += e * e;
            delta[o] = scale * e;
        }
        for (std::size_t l = L; l-- > 0;) {
            const DenseLayer& d = layers[l];
            double* gw = grad.data() + offset[l];
            double* gb = gw + d.weights.size();
            for (std::size_t o = 0; o < d.outDim; ++o) {
                const double* a = acts[l].data();
                double* g = gw + o * d.inDim;
                for (std::size_t i = 0; i < d.inDim; ++i) g[i] += delta[o] * a[i];
                gb[o] += delta[o];
            }
            if (l == 0) break;
            for (std::size_t i = 0; i < d.inDim; ++i) prev[i] = 0.0;
            for (std::size_t o = 0; o < d.outDim; ++o) {
                const double* wr = d.weights.data() + o * d.inDim;
                for (std::size_t i = 0; i < d.inDim; ++i) prev[i] += wr[i] * delta[o];
            }
            for (std::size_t i = 0; i < d.inDim; ++i) delta[i] = prev[i] * geluDerivative(pre[l - 1][i]);
        }
    }
    return loss / static_cast<double>(rows * out);
}

void TrainerConfig::validate() const {
    if (!(learningRate > 0.0)) throw InvalidArgument("trainer: learningRate must be positive");
    if (!(adamBeta1 >= 0.0 && adamBeta1 < 1.0) || !(adamBeta2 >= 0.0 && adamBeta2 < 1.0))
        throw InvalidArgument("trainer: Adam betas must lie in [0, 1)");
    if (!(adamEps > 0.0)) throw InvalidArgument("trainer: adamEps must be positive");
    if (batchSize == 0) throw InvalidArgument("trainer: batchSize must be positive");
    if (epochs == 0) throw InvalidArgument("trainer: epochs must be positive");
    if (!(finalLearningRateFraction > 0.0 && finalLearningRateFraction <= 1.0))
        throw InvalidArgument("trainer: finalLearningRateFraction must lie in (0, 1]");
}

TrainResult train(MlpNetwork& net, std::span<const double> x, std::span<const double> y, std::size_t rows,
                  const TrainerConfig& cfg) {
    cfg.validate();
    net.validate();
    const std::size_t in = net.inputDim(), out = net.outputDim();
    if (rows == 0) throw InvalidArgument("train: no samples");
    if (x.size() != rows * in || y.size() != rows * out) throw InvalidArgument("train: sample shape does not match the network");
    for (double v : x)
        if (!std::isfinite(v)) throw InvalidArgument("train: non-finite feature");
    for (double v : y)
        if (!std::isfinite(v)) throw InvalidArgument("train: non-finite label");

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> theta = parameters(net), good = theta;
    std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0), grad;
    std::vector<double> bx, by;
    TrainResult result;
    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.learningRate *
                          (cfg.epochs > 1 ? std::pow(cfg.finalLearningRateFraction,
                                                     static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1))
                                          : 1.0);
        std::shuffle(order.begin(), order.end(), rng);
        double sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < rows; start += cfg.batchSize) {
            const std::size_t nb = std::min(cfg.batchSize, rows - start);
            bx.resize(nb * in);
            by.resize(nb * out);
            for (std::size_t r = 0; r < nb; ++r) {
                std::copy_n(x.begin() + order[start + r] * in, in, bx.begin() + r * in);
                std::copy_n(y.begin() + order[start + r] * out, out, by.begin() + r * out);
            }
            double loss = lossAndGradient(net, bx, by, nb, grad);
            if (!std::isfinite(loss)) {
                setParameters(net, good);
                throw ConvergenceError("train: non-finite loss in epoch " + std::to_string(epoch) +
                                       "; weights restored to the last completed epoch");
            }
            sum += loss;
            ++batches;
            ++step;
            const double c1 = 1.0 - std::pow(cfg.adamBeta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.adamBeta2, static_cast<double>(step));
            for (std::size_t k = 0; k < theta.size(); ++k) {
                m[k] = cfg.adamBeta1 * m[k] + (1.0 - cfg.adamBeta1) * grad[k];
                v[k] = cfg.adamBeta2 * v[k] + (1.0 - cfg.adamBeta2) * grad[k] * grad[k];
                theta[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.adamEps);
            }
            setParameters(net, theta);
        }
        result.lossHistory.push_back(sum / static_cast<double>(batches));
        good = theta;
    }
    return result;
}

void SurrogateBundle::validate() const {
    if (species.size() != networks.size()) throw InvalidArgument("surrogate bundle: species and network counts differ");
    if (networks.empty()) throw InvalidArgument("surrogate bundle: no networks");
    for (std::size_t i = 0; i < networks.size(); ++i) {
        networks[i].validate();
        if (networks[i].outputDim() != 1) throw InvalidArgument("surrogate bundle: network " + species[i] + " must have one output");
        if (networks[i].inputDim() != networks[0].inputDim() || !(networks[i].inputNorm() == networks[0].inputNorm()))
            throw InvalidArgument("surrogate bundle: network " + species[i] + " does not share the input layout");
    }
}

void SurrogateBundle::validate(const Mechanism& mech) const {
    validate();
    const std::size_t n = mech.nSpecies();
    if (inputDim() != 2 + n)
        throw InvalidArgument("surrogate bundle: input dim " + std::to_string(inputDim()) + " does not match 2 + " +
                              std::to_string(n) + " species");
    std::vector<std::string> want;
    for (std::size_t k = 0; k < n; ++k)
        if (!mech.isInert(k)) want.push_back(mech.mixture().species(k).name);
    std::vector<std::string> have = species, sortedWant = want;
    std::sort(have.begin(), have.end());
    std::sort(sortedWant.begin(), sortedWant.end());
    if (have != sortedWant) throw InvalidArgument("surrogate bundle: networks do not cover exactly the reacting species");
}

SurrogateBundle trainSurrogate(const SampleTable& table, const std::vector<std::string>& species,
                               std::span<const std::size_t> hidden, const TrainerConfig& cfg,
                               std::vector<TrainResult>* history) {
    const std::size_t n = table.species.size(), rows = table.rows.size(), in = 2 + n;
    if (rows == 0) throw InvalidArgument("trainSurrogate: empty sample table");
    std::vector<double> x(rows * in);
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(table.rows[r].begin(), in, x.begin() + r * in);
    const Normalization inNorm = Normalization::fit(x, rows, in);
    std::vector<std::size_t> widths{in};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(1);
    SurrogateBundle b;
    for (std::size_t s = 0; s < species.size(); ++s) {
        auto it = std::find(table.species.begin(), table.species.end(), species[s]);
        if (it == table.species.end()) throw InvalidArgument("trainSurrogate: species " + species[s] + " not in the sample table");
        const std::size_t col = in + static_cast<std::size_t>(it - table.species.begin());
        std::vector<double> y(rows);
        for (std::size_t r = 0; r < rows; ++r) y[r] = table.rows[r][col];
        MlpNetwork net = MlpNetwork::random(widths, cfg.seed + s);
        net.setNormalization(inNorm, Normalization::fit(y, rows, 1));
        TrainerConfig c = cfg;
        c.seed = cfg.seed + s;
        TrainResult res = train(net, x, y, rows, c);
        if (history) history->push_back(std::move(res));
        b.species.push_back(species[s]);
        b.networks.push_back(std::move(net));
    }
    return b;
}

namespace {

constexpr char kMagic[4] = {'M', 'F', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double d) {
        const auto v = std::bit_cast<std::uint64_t>(d);
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        buf.insert(buf.end(), c, c + n);
    }
    void f64s(const std::vector<double>& v) {
        for (double d : v) f64(d);
    }
    std::vector<unsigned char> buf;
};

class Reader {
public:
    Reader(const std::vector<unsigned char>& b, std::size_t end, std::string src) : buf_(b), end_(end), src_(std::move(src)) {}
    void need(std::size_t n) {
        if (pos_ + n > end_) throw FormatError(src_ + ": truncated weights file at byte " + std::to_string(pos_));
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_++]) << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * i);
        return std::bit_cast<double>(v);
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::vector<double> f64s(std::size_t n) {
        need(8 * n);
        std::vector<double> v(n);
        for (double& d : v) d = f64();
        return v;
    }
    std::size_t pos() const { return pos_; }

private:
    const std::vector<unsigned char>& buf_;
    std::size_t end_;
    std::string src_;
    std::size_t pos_ = 0;
};

// Dimension fields above this are treated as corruption rather than allocated.
constexpr std::uint32_t kMaxDim = 1u << 20;

} // namespace

void saveWeights(std::ostream& os, const SurrogateBundle& b) {
    b.validate();
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(b.networks.size()));
    for (std::size_t s = 0; s < b.networks.size(); ++s) {
        const MlpNetwork& net = b.networks[s];
        w.u32(static_cast<std::uint32_t>(b.species[s].size()));
        w.bytes(b.species[s].data(), b.species[s].size());
        w.u32(static_cast<std::uint32_t>(net.layers().size()));
        for (const DenseLayer& l : net.layers()) {
            w.u32(static_cast<std::uint32_t>(l.inDim));
            w.u32(static_cast<std::uint32_t>(l.outDim));
            w.f64s(l.weights);
            w.f64s(l.bias);
        }
        w.f64s(net.inputNorm().mean);
        w.f64s(net.inputNorm().std);
        w.f64s(net.outputNorm().mean);
        w.f64s(net.outputNorm().std);
    }
    const std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, w.buf.data(), static_cast<uInt>(w.buf.size())));
    w.u32(crc);
    os.write(reinterpret_cast<const char*>(w.buf.data()), static_cast<std::streamsize>(w.buf.size()));
    if (!os) throw IoError("saveWeights: write failed");
}

SurrogateBundle loadWeights(std::istream& is, const std::string& source) {
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (buf.size() < 16) throw FormatError(source + ": truncated weights file");
    if (!std::equal(kMagic, kMagic + 4, buf.begin())) throw FormatError(source + ": bad magic, not a weights file");
    const std::size_t body = buf.size() - 4;
    Reader r(buf, body, source);
    r.str(4);
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw FormatError(source + ": unsupported weights format version " + std::to_string(version));
    std::uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(buf[body + i]) << (8 * i);
    const auto crc = static_cast<std::uint32_t>(crc32(0L, buf.data(), static_cast<uInt>(body)));
    if (crc != stored) throw FormatError(source + ": checksum mismatch, file is corrupt or truncated");
    const std::uint32_t count = r.u32();
    if (count > kMaxDim) throw FormatError(source + ": implausible network count");
    SurrogateBundle b;
    for (std::uint32_t s = 0; s < count; ++s) {
        const std::uint32_t len = r.u32();
        if (len > kMaxDim) throw FormatError(source + ": implausible name length");
        b.species.push_back(r.str(len));
        const std::uint32_t nl = r.u32();
        if (nl == 0 || nl > kMaxDim) throw FormatError(source + ": implausible layer count");
        std::vector<DenseLayer> layers;
        for (std::uint32_t l = 0; l < nl; ++l) {
            DenseLayer d;
            d.inDim = r.u32();
            d.outDim = r.u32();
            if (d.inDim == 0 || d.outDim == 0 || d.inDim > kMaxDim || d.outDim > kMaxDim)
                throw FormatError(source + ": implausible layer dims");
            if (!layers.empty() && layers.back().outDim != d.inDim)
                throw FormatError(source + ": layer dims of network " + b.species.back() + " do not chain");
            d.weights = r.f64s(d.inDim * d.outDim);
            d.bias = r.f64s(d.outDim);
            layers.push_back(std::move(d));
        }
        const std::size_t in = layers.front().inDim, out = layers.back().outDim;
        Normalization ni, no;
        ni.mean = r.f64s(in);
        ni.std = r.f64s(in);
        no.mean = r.f64s(out);
        no.std = r.f64s(out);
        try {
            b.networks.emplace_back(std::move(layers), std::move(ni), std::move(no));
        } catch (const InvalidArgument& e) {
            throw FormatError(source + ": " + e.what());
        }
    }
    if (r.pos() != body) throw FormatError(source + ": trailing bytes before the checksum");
    try {
        b.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(source + ": " + e.what());
    }
    return b;
}

void saveWeights(const std::string& path, const SurrogateBundle& b) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    saveWeights(os, b);
}

SurrogateBundle loadWeights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    return loadWeights(is, path);
}

SurrogateDiagnostics applySurrogateField(const SurrogateBundle& bundle, const Mechanism& mech, double p, CellField& T,
                                         CellField& Y, double dt, double trainingDt) {
    bundle.validate(mech);
    const std::size_t n = mech.nSpecies(), nc = T.nCells(), in = 2 + n;
    if (Y.nComponents != n || Y.nCells() != nc || T.nComponents != 1)
        throw InvalidArgument("applySurrogateField: fields do not match the mechanism");
    if (!(dt > 0.0) || !(trainingDt > 0.0)) throw InvalidArgument("applySurrogateField: time steps must be positive");
    const double ratio = trainingDt / dt;
    if (std::round(ratio) < 1.0 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        std::ostringstream os;
        os << "applySurrogateField: dt " << dt << " s is not an integer fraction of the training dt " << trainingDt << " s";
        throw InvalidArgument(os.str());
    }
    const Mixture& mix = mech.mixture();
    std::vector<double> x(nc * in);
    for (std::size_t c = 0; c < nc; ++c) {
        x[c * in] = T(0, c);
        x[c * in + 1] = p;
        for (std::size_t k = 0; k < n; ++k) x[c * in + 2 + k] = Y(k, c);
    }
    std::vector<std::size_t> target(bundle.species.size());
    std::vector<std::vector<double>> rate(bundle.species.size(), std::vector<double>(nc));
    for (std::size_t s = 0; s < bundle.species.size(); ++s) {
        target[s] = mix.index(bundle.species[s]);
        bundle.networks[s].forward(x, nc, rate[s]);
    }
    std::vector<std::size_t> inert;
    for (std::size_t k = 0; k < n; ++k)
        if (mech.isInert(k)) inert.push_back(k);

    SurrogateDiagnostics diag;
    std::vector<double> y0(n), y(n);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t k = 0; k < n; ++k) y0[k] = y[k] = Y(k, c);
        const double h0 = mix.h(T(0, c), y0);
        for (std::size_t s = 0; s < target.size(); ++s) y[target[s]] += rate[s][c] * dt;
        double residual = 1.0;
        for (double v : y) residual -= v;
        double inertSum = 0.0;
        for (std::size_t k : inert) inertSum += y[k];
        for (std::size_t k : inert)
            y[k] += inertSum > 0.0 ? residual * y[k] / inertSum : residual / static_cast<double>(inert.size());
        double sum = 0.0;
        for (double& v : y) sum += (v = std::clamp(v, 0.0, 1.0));
        if (!(sum > 0.0)) throw ConvergenceError("applySurrogateField: cell " + std::to_string(c) + ": all mass fractions clipped to zero");
        const double correction = std::abs(sum - 1.0);
        diag.maxCorrection = std::max(diag.maxCorrection, correction);
        if (correction > 1e-3) ++diag.fidelityWarnings;
        for (double& v : y) v /= sum;
        try {
            T(0, c) = mix.TfromH(h0, p, y, T(0, c));
        } catch (const Error& e) {
            throw ConvergenceError("applySurrogateField: cell " + std::to_string(c) + ": " + e.what());
        }
        for (std::size_t k = 0; k < n; ++k) Y(k, c) = y[k];
    }
    return diag;
}

} // namespace rflow
