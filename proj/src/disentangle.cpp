#include "dia/disentangle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dia/rng.hpp"

namespace dia {

void DisentangleConfig::validate() const {
    if (latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

namespace {

constexpr std::size_t kFamilies[3] = {0, 3, 6};  // base column of each synthetic family

Layer frozen_affine(const std::vector<double>& scale, const std::vector<double>& offset) {
    Layer l;
    l.weights = Matrix(scale.size(), scale.size());
    for (std::size_t j = 0; j < scale.size(); ++j) l.weights(j, j) = scale[j];
    l.bias = offset;
    l.activation = Activation::Linear;
    l.trainable = false;
    return l;
}

// column [min, max] over the given rows
void column_ranges(const Matrix& m, std::vector<double>& lo, std::vector<double>& hi) {
    lo.assign(m.cols, 0.0);
    hi.assign(m.cols, 0.0);
    for (std::size_t j = 0; j < m.cols; ++j) {
        double a = m(0, j), b = m(0, j);
        for (std::size_t i = 1; i < m.rows; ++i) {
            a = std::min(a, m(i, j));
            b = std::max(b, m(i, j));
        }
        lo[j] = a;
        hi[j] = b;
    }
}

DenseNet build_mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                   Activation final_act, std::uint64_t seed) {
    std::vector<std::size_t> dims = {in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    std::vector<Activation> acts(dims.size() - 1, Activation::Relu);
    acts.back() = final_act;
    return make_net(dims, acts, seed);
}

Matrix hconcat(const std::vector<double>& first_col, const Matrix& rest) {
    if (first_col.size() != rest.rows) throw std::invalid_argument("hconcat: row mismatch");
    Matrix out(rest.rows, rest.cols + 1);
    for (std::size_t i = 0; i < rest.rows; ++i) {
        out(i, 0) = first_col[i];
        for (std::size_t j = 0; j < rest.cols; ++j) out(i, j + 1) = rest(i, j);
    }
    return out;
}

Matrix drop_first_col(const Matrix& m) {
    Matrix out(m.rows, m.cols - 1);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 1; j < m.cols; ++j) out(i, j - 1) = m(i, j);
    return out;
}

std::size_t xy_index(const std::string& p) {
    const auto& names = xy_column_names();
    auto it = std::find(names.begin(), names.end(), p);
    if (it == names.end())
        throw std::invalid_argument("handcrafted rep: '" + p + "' is not one of the nine synthetic columns");
    return static_cast<std::size_t>(it - names.begin());
}

double invert_to_base(std::size_t role, double p, const std::string& name) {
    switch (role) {
        case 0: return p;
        case 1: return p / 2.0;
        default:
            if (p < 0.0)
                throw std::invalid_argument("decode: negative value " + std::to_string(p) +
                                            " for squared feature '" + name + "'");
            return std::sqrt(p);
    }
}

Matrix handcrafted_encode(const DisentangledRep& rep, const Matrix& instances) {
    const std::size_t fam_p = rep.feature_index / 3;
    Matrix out(instances.rows, 3);  // p plus the two other family bases
    for (std::size_t i = 0; i < instances.rows; ++i) {
        out(i, 0) = instances(i, rep.feature_index);
        std::size_t k = 1;
        for (std::size_t f = 0; f < 3; ++f) {
            if (f == fam_p) continue;
            out(i, k++) = instances(i, kFamilies[f]);
        }
    }
    return out;
}

Matrix handcrafted_decode(const DisentangledRep& rep, const std::vector<double>& p_values,
                          const Matrix& latents) {
    if (latents.cols != 2) throw std::invalid_argument("handcrafted decode: latent width must be 2");
    if (p_values.size() != latents.rows) throw std::invalid_argument("handcrafted decode: row mismatch");
    const std::size_t fam_p = rep.feature_index / 3;
    const std::size_t role = rep.feature_index % 3;

    Matrix out(latents.rows, 9);
    for (std::size_t i = 0; i < latents.rows; ++i) {
        double bases[3];
        bases[fam_p] = invert_to_base(role, p_values[i], rep.feature);
        std::size_t k = 0;
        for (std::size_t f = 0; f < 3; ++f) {
            if (f == fam_p) continue;
            bases[f] = latents(i, k++);
        }
        for (std::size_t f = 0; f < 3; ++f) {
            const double b = bases[f];
            out(i, kFamilies[f]) = b;
            out(i, kFamilies[f] + 1) = 2.0 * b;
            out(i, kFamilies[f] + 2) = b * b;
        }
    }
    return out;
}

double population_variance(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    return sq / n;
}

}  // namespace

DisentangledRep train_adversarial(const TabularDataset& data, const std::string& p, DisentangleConfig cfg,
                                  AdversarialTrace* trace) {
    cfg.validate();
    const std::size_t p_idx = data.column_index(p);
    const Matrix train_x = data.matrix_of(Split::Train);
    if (train_x.rows == 0) throw std::invalid_argument("train_adversarial: empty train split");
    const std::size_t width = train_x.cols;

    DisentangledRep rep;
    rep.kind = RepKind::Learned;
    rep.feature = p;
    rep.feature_index = p_idx;
    rep.config = cfg;
    for (const Column& c : data.columns) rep.column_names.push_back(c.name);
    if (cfg.latent_dim >= width)
        rep.notes.push_back("latent_dim " + std::to_string(cfg.latent_dim) + " >= feature count " +
                            std::to_string(width) + "; disentanglement may be vacuous");

    // The output band is widened past the observed range so the sigmoid works
    // in its responsive region even for values near the extremes.
    constexpr double kBandMargin = 1.5;
    std::vector<double> lo, hi;
    column_ranges(train_x, lo, hi);
    std::vector<double> scale(width), offset(width);
    for (std::size_t j = 0; j < width; ++j) {
        const double range = hi[j] - lo[j];
        scale[j] = range * (1.0 + 2.0 * kBandMargin);
        offset[j] = lo[j] - range * kBandMargin;
    }

    // Frozen input standardization (train-split statistics); raw rows stay
    // the module contract, the trainable stack sees centered unit-scale data.
    std::vector<double> in_scale(width), in_offset(width);
    for (std::size_t j = 0; j < width; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < train_x.rows; ++i) mean += train_x(i, j);
        mean /= static_cast<double>(train_x.rows);
        double var = 0.0;
        for (std::size_t i = 0; i < train_x.rows; ++i)
            var += (train_x(i, j) - mean) * (train_x(i, j) - mean);
        const double stddev = std::sqrt(var / static_cast<double>(train_x.rows));
        in_scale[j] = stddev > 0.0 ? 1.0 / stddev : 1.0;
        in_offset[j] = -mean * in_scale[j];
    }

    rep.encoder = build_mlp(width, cfg.hidden, cfg.latent_dim, Activation::Linear,
                            derive_seed(cfg.seed, "encoder"));
    rep.encoder.layers.insert(rep.encoder.layers.begin(), frozen_affine(in_scale, in_offset));

    rep.decoder = build_mlp(1 + cfg.latent_dim, cfg.hidden, width, Activation::Sigmoid,
                            derive_seed(cfg.seed, "decoder"));
    std::vector<double> dec_in_scale(1 + cfg.latent_dim, 1.0), dec_in_offset(1 + cfg.latent_dim, 0.0);
    dec_in_scale[0] = in_scale[p_idx];
    dec_in_offset[0] = in_offset[p_idx];
    rep.decoder.layers.insert(rep.decoder.layers.begin(), frozen_affine(dec_in_scale, dec_in_offset));
    rep.decoder.layers.push_back(frozen_affine(scale, offset));

    rep.discriminator = build_mlp(cfg.latent_dim, cfg.hidden, 1, Activation::Sigmoid,
                                  derive_seed(cfg.seed, "discriminator"));
    if (!cfg.p_is_binary)
        rep.discriminator.layers.push_back(frozen_affine({scale[p_idx]}, {offset[p_idx]}));

    const LossKind p_loss = cfg.p_is_binary ? LossKind::Bce : LossKind::Mse;
    Rng rng(derive_seed(cfg.seed, "adv_batches"));
    std::vector<std::size_t> idx(cfg.batch_size);

    for (std::size_t step = 0; step < cfg.train_steps; ++step) {
        for (std::size_t b = 0; b < cfg.batch_size; ++b) idx[b] = rng.index(train_x.rows);
        const Matrix bx = train_x.gather_rows(idx);
        Matrix bp(cfg.batch_size, 1);
        for (std::size_t b = 0; b < cfg.batch_size; ++b) bp(b, 0) = bx(b, p_idx);

        // discriminator step against the current encoder
        Matrix z = forward(rep.encoder, bx);
        {
            ForwardTrace th = forward_trace(rep.discriminator, z);
            const double l_disc = loss_value(p_loss, th.post.back(), bp);
            if (trace) trace->disc.push_back(l_disc);
            if (!std::isfinite(l_disc))
                throw TrainingDivergence(step, trace ? trace->disc : std::vector<double>{});
            Gradients gh = backprop(rep.discriminator, th, loss_grad(p_loss, th.post.back(), bp));
            apply_sgd(rep.discriminator, gh, cfg.learning_rate);
        }

        // joint encoder/decoder step; the adversarial term sees the updated h
        JointGradients jg = joint_update_gradients(rep, bx);
        apply_sgd(rep.encoder, jg.encoder, cfg.learning_rate);
        apply_sgd(rep.decoder, jg.decoder, cfg.learning_rate);

        const double l_enc = jg.l_dec - cfg.beta * jg.l_disc;
        if (trace) {
            trace->dec.push_back(jg.l_dec);
            trace->enc.push_back(l_enc);
        }
        if (!std::isfinite(jg.l_dec) || !std::isfinite(l_enc))
            throw TrainingDivergence(step, trace ? trace->enc : std::vector<double>{});
    }
    return rep;
}

JointGradients joint_update_gradients(const DisentangledRep& rep, const Matrix& batch_x) {
    if (rep.kind != RepKind::Learned)
        throw std::invalid_argument("joint_update_gradients: learned representation required");
    const LossKind p_loss = rep.config.p_is_binary ? LossKind::Bce : LossKind::Mse;

    Matrix bp(batch_x.rows, 1);
    for (std::size_t i = 0; i < batch_x.rows; ++i) bp(i, 0) = batch_x(i, rep.feature_index);

    ForwardTrace tf = forward_trace(rep.encoder, batch_x);
    const Matrix& latents = tf.post.back();
    ForwardTrace tg = forward_trace(rep.decoder, hconcat(bp.column(0), latents));
    const Matrix& xhat = tg.post.back();

    JointGradients jg;
    jg.l_dec = loss_value(LossKind::Mse, xhat, batch_x);
    jg.decoder = backprop(rep.decoder, tg, loss_grad(LossKind::Mse, xhat, batch_x));

    ForwardTrace th = forward_trace(rep.discriminator, latents);
    jg.l_disc = loss_value(p_loss, th.post.back(), bp);
    Matrix adv_up = loss_grad(p_loss, th.post.back(), bp);
    for (double& v : adv_up.data) v *= -rep.config.beta;
    const Gradients gh_adv = backprop(rep.discriminator, th, adv_up);

    Matrix enc_up = drop_first_col(jg.decoder.input);
    for (std::size_t i = 0; i < enc_up.data.size(); ++i) enc_up.data[i] += gh_adv.input.data[i];
    jg.encoder = backprop(rep.encoder, tf, enc_up);
    return jg;
}

Matrix encode(const DisentangledRep& rep, const Matrix& instances) {
    if (instances.cols != rep.input_width())
        throw std::invalid_argument("encode: instance width " + std::to_string(instances.cols) +
                                    " != representation width " + std::to_string(rep.input_width()));
    if (rep.kind == RepKind::HandcraftedXY) return handcrafted_encode(rep, instances);
    Matrix latents = forward(rep.encoder, instances);
    std::vector<double> p(instances.rows);
    for (std::size_t i = 0; i < instances.rows; ++i) p[i] = instances(i, rep.feature_index);
    return hconcat(p, latents);
}

Matrix decode(const DisentangledRep& rep, const std::vector<double>& p_values, const Matrix& latents) {
    if (latents.cols != rep.latent_dim())
        throw std::invalid_argument("decode: latent width " + std::to_string(latents.cols) + " != " +
                                    std::to_string(rep.latent_dim()));
    if (p_values.size() != latents.rows) throw std::invalid_argument("decode: p/latent row mismatch");
    if (rep.kind == RepKind::HandcraftedXY) return handcrafted_decode(rep, p_values, latents);
    return forward(rep.decoder, hconcat(p_values, latents));
}

Matrix decode_joined(const DisentangledRep& rep, const Matrix& p_and_latents) {
    if (p_and_latents.cols != 1 + rep.latent_dim())
        throw std::invalid_argument("decode_joined: width must be 1 + latent_dim");
    return decode(rep, p_and_latents.column(0), drop_first_col(p_and_latents));
}

DisentangledRep handcrafted_xy_rep(const std::string& p) {
    DisentangledRep rep;
    rep.kind = RepKind::HandcraftedXY;
    rep.feature = p;
    rep.feature_index = xy_index(p);
    rep.column_names = xy_column_names();
    rep.config.latent_dim = 2;
    return rep;
}

std::vector<double> predict_p(const DisentangledRep& rep, const Matrix& latents, const Matrix& instances) {
    if (rep.kind == RepKind::Learned) {
        Matrix out = forward(rep.discriminator, latents);
        return out.column(0);
    }
    // The handcrafted latents carry no information about p; the best
    // discriminator is the constant mean predictor.
    std::vector<double> p(instances.rows);
    for (std::size_t i = 0; i < instances.rows; ++i) p[i] = instances(i, rep.feature_index);
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
    return std::vector<double>(instances.rows, mean);
}

double ErrorReport::mean_square_reconstruction() const {
    if (reconstruction.data.empty()) return 0.0;
    double acc = 0.0;
    for (double v : reconstruction.data) acc += v * v;
    return acc / static_cast<double>(reconstruction.data.size());
}

ErrorReport error_report(const DisentangledRep& rep, const BatchModel& model, const TabularDataset& data) {
    if (model.input_width != rep.input_width())
        throw std::invalid_argument("error_report: model width does not match representation");
    const Matrix x = data.matrix_of(Split::Test);
    if (x.rows == 0) throw std::invalid_argument("error_report: empty test split");

    const Matrix enc = encode(rep, x);
    const Matrix latents = drop_first_col(enc);
    const std::vector<double> p = enc.column(0);
    const Matrix xhat = decode(rep, p, latents);

    ErrorReport report;
    report.reconstruction = Matrix(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        report.reconstruction.data[i] = x.data[i] - xhat.data[i];

    const Matrix mx = model.eval(x);
    const Matrix mxhat = model.eval(xhat);
    report.prediction.resize(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) report.prediction[i] = mx(i, 0) - mxhat(i, 0);

    const double var_p = population_variance(p);
    if (var_p == 0.0) {
        report.constant_feature = true;
        return report;
    }
    const std::vector<double> phat = predict_p(rep, latents, x);
    double mse = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) mse += (p[i] - phat[i]) * (p[i] - phat[i]);
    mse /= static_cast<double>(p.size());
    report.disentanglement = mse / var_p;
    return report;
}

AdversarialLosses adversarial_losses(const DisentangledRep& rep, const Matrix& batch_x) {
    if (rep.kind != RepKind::Learned)
        throw std::invalid_argument("adversarial_losses: learned representation required");
    const Matrix enc = encode(rep, batch_x);
    const Matrix latents = drop_first_col(enc);
    const std::vector<double> p = enc.column(0);
    const Matrix xhat = decode(rep, p, latents);
    const Matrix phat = forward(rep.discriminator, latents);
    const Matrix p_mat = Matrix::column_vector(p);

    const LossKind p_loss = rep.config.p_is_binary ? LossKind::Bce : LossKind::Mse;
    AdversarialLosses out;
    out.dec = loss_value(LossKind::Mse, xhat, batch_x);
    out.disc = loss_value(p_loss, phat, p_mat);
    out.enc = out.dec - rep.config.beta * out.disc;
    return out;
}

}  // namespace dia
