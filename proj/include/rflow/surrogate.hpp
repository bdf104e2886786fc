#pragma once

#include "rflow/chemistry.hpp"
#include "rflow/field.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rflow {

/// Exact GELU, 0.5 x (1 + erf(x / sqrt 2)).
double gelu(double x);
double geluDerivative(double x);

/// Per-feature z-score: normalized = (value - mean) / std.
struct Normalization {
    std::vector<double> mean;
    std::vector<double> std;

    static Normalization identity(std::size_t dim);
    /// Mean and population std of each column of a row-major table; a
    /// zero-variance column gets std = max(|mean|, 1).
    static Normalization fit(std::span<const double> data, std::size_t rows, std::size_t dim);
    bool operator==(const Normalization&) const = default;
};

/// Fully connected layer y = W x + b, W row-major outDim x inDim.
struct DenseLayer {
    std::size_t inDim = 0;
    std::size_t outDim = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    bool operator==(const DenseLayer&) const = default;
};

/// GELU hidden layers, identity output layer, normalization applied inside.
class MlpNetwork {
public:
    MlpNetwork() = default;
    MlpNetwork(std::vector<DenseLayer> layers, Normalization input, Normalization output);

    /// widths = {in, hidden..., out}; weights drawn N(0, 1/inDim), zero bias,
    /// identity normalization.
    static MlpNetwork random(std::span<const std::size_t> widths, std::uint64_t seed);

    std::size_t inputDim() const { return layers_.empty() ? 0 : layers_.front().inDim; }
    std::size_t outputDim() const { return layers_.empty() ? 0 : layers_.back().outDim; }
    std::size_t parameterCount() const;
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    const Normalization& inputNorm() const { return inputNorm_; }
    const Normalization& outputNorm() const { return outputNorm_; }
    void setNormalization(Normalization input, Normalization output);

    /// Row-major batch; every row is evaluated with the same summation order,
    /// so results do not depend on how rows are batched.
    void forward(std::span<const double> x, std::size_t rows, std::span<double> y) const;
    std::vector<double> forward(std::span<const double> x) const;

    /// Throws when the layer dims do not chain or a std entry is not positive.
    void validate() const;

    bool operator==(const MlpNetwork&) const = default;

private:
    std::vector<DenseLayer> layers_;
    Normalization inputNorm_;
    Normalization outputNorm_;
};

/// MSE in normalized output space over a row-major batch, and its gradient
/// with respect to every parameter, flattened layer by layer as W then b.
double lossAndGradient(const MlpNetwork& net, std::span<const double> x, std::span<const double> y,
                       std::size_t rows, std::vector<double>& grad);

/// Flattened parameters in the gradient layout.
std::vector<double> parameters(const MlpNetwork& net);
void setParameters(MlpNetwork& net, std::span<const double> theta);

struct TrainerConfig {
    double learningRate = 1e-3;
    double adamBeta1 = 0.9;
    double adamBeta2 = 0.999;
    double adamEps = 1e-8;
    std::size_t batchSize = 64;
    std::size_t epochs = 100;
    std::uint64_t seed = 1;
    /// Learning rate at the last epoch as a fraction of learningRate; the rate
    /// decays geometrically in between.
    double finalLearningRateFraction = 1.0;

    void validate() const;
};

struct TrainResult {
    std::vector<double> lossHistory; ///< mean minibatch loss per epoch
};

/// Minibatch Adam on the MSE. The network's normalization is used as is.
/// Throws ConvergenceError on a non-finite loss after restoring the weights
/// of the last completed epoch.
TrainResult train(MlpNetwork& net, std::span<const double> x, std::span<const double> y, std::size_t rows,
                  const TrainerConfig& cfg);

/// One network per reacting species, inputs (T, p, Y_1..Y_n) over all
/// mechanism species, output dY_k/dt.
struct SurrogateBundle {
    std::vector<std::string> species;
    std::vector<MlpNetwork> networks;

    std::size_t inputDim() const { return networks.empty() ? 0 : networks.front().inputDim(); }
    /// Shared input dim and normalization, scalar outputs.
    void validate() const;
    /// Additionally checks coverage of exactly the reacting species of mech.
    void validate(const Mechanism& mech) const;
    bool operator==(const SurrogateBundle&) const = default;
};

/// Trains one network per listed species on a sample table. hidden are the
/// hidden widths; normalization is fitted to the table.
SurrogateBundle trainSurrogate(const SampleTable& table, const std::vector<std::string>& species,
                               std::span<const std::size_t> hidden, const TrainerConfig& cfg,
                               std::vector<TrainResult>* history = nullptr);

void saveWeights(std::ostream& os, const SurrogateBundle& b);
SurrogateBundle loadWeights(std::istream& is, const std::string& source = "<stream>");
void saveWeights(const std::string& path, const SurrogateBundle& b);
SurrogateBundle loadWeights(const std::string& path);

struct SurrogateDiagnostics {
    std::size_t fidelityWarnings = 0; ///< cells whose renormalization exceeded 1e-3
    double maxCorrection = 0.0;
};

/// Advances Y by the predicted rates over dt, lets the inert species absorb
/// the residual, clips to [0, 1], renormalizes and recovers T from the
/// enthalpy held before the update. dt must equal trainingDt or an integer
/// fraction of it.
SurrogateDiagnostics applySurrogateField(const SurrogateBundle& bundle, const Mechanism& mech, double p, CellField& T,
                                         CellField& Y, double dt, double trainingDt);

} // namespace rflow
