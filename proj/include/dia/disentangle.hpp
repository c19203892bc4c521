#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dia/dataset.hpp"
#include "dia/matrix.hpp"
#include "dia/nn.hpp"
#include "dia/shap.hpp"

namespace dia {

struct DisentangleConfig {
    double beta = 0.5;
    std::size_t latent_dim = 4;
    double learning_rate = 0.01;
    std::size_t batch_size = 16;
    std::size_t train_steps = 10000;
    std::uint64_t seed = 0;
    bool p_is_binary = false;
    std::vector<std::size_t> hidden = {10, 10};

    void validate() const;
};

enum class RepKind { Learned, HandcraftedXY };

// Encoder f maps a full feature row (p included) to latents; decoder g maps
// (p, latents) back to the full row; discriminator h tries to recover p from
// the latents alone. Decoder and discriminator end in a sigmoid followed by a
// frozen affine layer that restores the column ranges seen in training.
struct DisentangledRep {
    RepKind kind = RepKind::Learned;
    std::string feature;
    std::size_t feature_index = 0;
    DisentangleConfig config;
    std::vector<std::string> column_names;
    DenseNet encoder;        // width -> latent_dim
    DenseNet decoder;        // 1 + latent_dim -> width
    DenseNet discriminator;  // latent_dim -> 1
    std::vector<std::string> notes;

    std::size_t input_width() const { return column_names.size(); }
    std::size_t latent_dim() const { return kind == RepKind::HandcraftedXY ? 2 : config.latent_dim; }
};

struct AdversarialTrace {
    std::vector<double> disc;
    std::vector<double> dec;
    std::vector<double> enc;
};

// One discriminator step then one joint encoder/decoder step per minibatch,
// on a shared batch; the encoder's adversarial term sees the refreshed
// discriminator. Trains on the dataset's train split.
DisentangledRep train_adversarial(const TabularDataset& data, const std::string& p, DisentangleConfig cfg,
                                  AdversarialTrace* trace = nullptr);

// Rows of (p, x'); column 0 carries p through unchanged.
Matrix encode(const DisentangledRep& rep, const Matrix& instances);

Matrix decode(const DisentangledRep& rep, const std::vector<double>& p_values, const Matrix& latents);
Matrix decode_joined(const DisentangledRep& rep, const Matrix& p_and_latents);

// Exact analytic representation for the nine-column x+y dataset.
DisentangledRep handcrafted_xy_rep(const std::string& p);

// Discriminator output for given latents (p-hat).
std::vector<double> predict_p(const DisentangledRep& rep, const Matrix& latents, const Matrix& instances);

struct ErrorReport {
    Matrix reconstruction;            // x - x_hat, per instance per feature
    std::vector<double> prediction;   // M(x) - M(x_hat), per instance
    std::optional<double> disentanglement;  // empty when p is constant
    bool constant_feature = false;

    double mean_square_reconstruction() const;
};

// Evaluated on the test split of the dataset.
ErrorReport error_report(const DisentangledRep& rep, const BatchModel& model, const TabularDataset& data);

struct AdversarialLosses {
    double enc = 0.0;
    double dec = 0.0;
    double disc = 0.0;
};

// Losses of the current triple on an explicit batch; enc == dec - beta*disc
// holds exactly for non-binary p.
AdversarialLosses adversarial_losses(const DisentangledRep& rep, const Matrix& batch_x);

struct JointGradients {
    Gradients encoder;  // of L_dec - beta * L_disc w.r.t. encoder parameters
    Gradients decoder;  // of L_dec w.r.t. decoder parameters
    double l_dec = 0.0;
    double l_disc = 0.0;
};

// Gradients of the joint encoder/decoder objective against the current
// discriminator; one sub-step of train_adversarial.
JointGradients joint_update_gradients(const DisentangledRep& rep, const Matrix& batch_x);

}  // namespace dia
