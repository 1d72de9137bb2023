#include "hmvf/driver_state.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hmvf {

namespace {

double dist(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void require_points(const LandmarkFrame& f) {
    if (f.points.size() < 18) {
        throw std::invalid_argument("LandmarkFrame: need at least 18 points");
    }
}

}  // namespace

void FuzzyRuleBase::validate() const {
    if (rules.size() != 16) {
        throw std::invalid_argument("FuzzyRuleBase: exactly 16 rules required");
    }
    for (const FuzzyRule& r : rules) {
        if (r.efv.sigma <= 0.0 || r.mfv.sigma <= 0.0 || r.entropy.sigma <= 0.0) {
            throw std::invalid_argument("FuzzyRuleBase: antecedent sigma must be > 0");
        }
    }
}

double FuzzyRuleBase::min_consequent() const {
    if (rules.empty()) throw std::invalid_argument("FuzzyRuleBase: empty rule base");
    double m = rules.front().consequent_s;
    for (const FuzzyRule& r : rules) m = std::min(m, r.consequent_s);
    return m;
}

double FuzzyRuleBase::max_consequent() const {
    if (rules.empty()) throw std::invalid_argument("FuzzyRuleBase: empty rule base");
    double m = rules.front().consequent_s;
    for (const FuzzyRule& r : rules) m = std::max(m, r.consequent_s);
    return m;
}

FuzzyRuleBase FuzzyRuleBase::default_base() {
    // EFV partitioned low->high (drowsy eyes score low), MFV and entropy
    // low/high. Consequents span [0.1, 2.0] s, monotone in each factor.
    const std::array<double, 4> efv_centers = {0.05, 0.15, 0.25, 0.35};
    const double efv_sigma = 0.07;
    const std::array<double, 2> mfv_centers = {0.30, 0.75};
    const double mfv_sigma = 0.22;
    const std::array<double, 2> ent_centers = {0.40, 1.20};
    const double ent_sigma = 0.45;

    const double r_floor = 0.1, r_ceil = 2.0;
    const double w_efv = 0.60, w_mfv = 0.25, w_ent = 0.15;

    FuzzyRuleBase rb;
    for (std::size_t i = 0; i < efv_centers.size(); ++i) {
        for (std::size_t j = 0; j < mfv_centers.size(); ++j) {
            for (std::size_t k = 0; k < ent_centers.size(); ++k) {
                const double fatigue = w_efv * static_cast<double>(3 - i) / 3.0 +
                                       w_mfv * static_cast<double>(j) +
                                       w_ent * static_cast<double>(k);
                FuzzyRule r;
                r.efv = {efv_centers[i], efv_sigma};
                r.mfv = {mfv_centers[j], mfv_sigma};
                r.entropy = {ent_centers[k], ent_sigma};
                r.consequent_s = r_floor + (r_ceil - r_floor) * fatigue;
                rb.rules.push_back(r);
            }
        }
    }
    return rb;
}

double eye_feature(const LandmarkFrame& f) {
    require_points(f);
    const auto& p = f.points;
    const double horiz = dist(p[0], p[3]);  // p1 - p4
    if (horiz <= 0.0) {
        throw std::domain_error("eye_feature: coincident eye corners (degenerate frame)");
    }
    return (dist(p[1], p[5]) + dist(p[2], p[4])) / (2.0 * horiz);
}

double mouth_feature(const LandmarkFrame& f) {
    require_points(f);
    const auto& p = f.points;
    const double horiz = dist(p[10], p[14]);  // p11 - p15
    if (horiz <= 0.0) {
        throw std::domain_error("mouth_feature: coincident mouth corners (degenerate frame)");
    }
    return (dist(p[11], p[15]) + dist(p[12], p[16]) + dist(p[13], p[17])) /
           (3.0 * horiz);
}

double motion_entropy(const LandmarkFrame& f) {
    if (f.points.size() < 2) {
        throw std::invalid_argument("motion_entropy: need at least 2 points");
    }
    const std::size_t n = f.points.size();
    double cx = 0.0, cy = 0.0;
    for (const Point2& p : f.points) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);

    std::vector<double> l(n);
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        l[i] = std::hypot(cx - f.points[i].x, cy - f.points[i].y);
        mu += l[i];
    }
    mu /= static_cast<double>(n);

    double var = 0.0;
    for (double li : l) var += (li - mu) * (li - mu);
    var /= static_cast<double>(n);
    const double sigma = std::sqrt(var);
    if (sigma == 0.0) {
        return 0.0;  // all distances equal: single-bin distribution
    }

    const double width = mu / sigma;
    const double max_l = *std::max_element(l.begin(), l.end());
    const std::size_t n_bins = static_cast<std::size_t>(std::floor(max_l / width)) + 1;
    std::vector<std::size_t> counts(n_bins, 0);
    for (double li : l) {
        std::size_t bin = static_cast<std::size_t>(std::floor(li / width));
        bin = std::min(bin, n_bins - 1);
        ++counts[bin];
    }

    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;  // empty bins contribute nothing
        const double q = static_cast<double>(c) / static_cast<double>(n);
        h -= q * std::log(q);
    }
    return h;
}

FacialFeatures facial_features(const LandmarkFrame& f) {
    return {eye_feature(f), mouth_feature(f), motion_entropy(f)};
}

double gaussian_membership(double x, double center, double sigma) {
    if (sigma <= 0.0) {
        throw std::invalid_argument("gaussian_membership: sigma must be > 0");
    }
    const double d = x - center;
    return std::exp(-d * d / (2.0 * sigma * sigma));
}

double rule_activation(const FacialFeatures& ft, const FuzzyRule& r) {
    return gaussian_membership(ft.efv, r.efv.center, r.efv.sigma) *
           gaussian_membership(ft.mfv, r.mfv.center, r.mfv.sigma) *
           gaussian_membership(ft.entropy, r.entropy.center, r.entropy.sigma);
}

double infer_reaction_time(const FacialFeatures& ft, const FuzzyRuleBase& rb) {
    if (rb.rules.empty()) {
        throw std::invalid_argument("infer_reaction_time: empty rule base");
    }
    // Activations are normalized by the strongest rule before exponentiating.
    // The weighted average is invariant to the common scale, and the
    // denominator stays positive even when every raw activation underflows.
    auto log_activation = [&](const FuzzyRule& r) {
        auto term = [](double x, const GaussianSet& g) {
            if (g.sigma <= 0.0) {
                throw std::invalid_argument("infer_reaction_time: sigma must be > 0");
            }
            const double d = x - g.center;
            return -d * d / (2.0 * g.sigma * g.sigma);
        };
        return term(ft.efv, r.efv) + term(ft.mfv, r.mfv) + term(ft.entropy, r.entropy);
    };
    double max_lw = -std::numeric_limits<double>::infinity();
    for (const FuzzyRule& r : rb.rules) max_lw = std::max(max_lw, log_activation(r));

    double num = 0.0, den = 0.0;
    for (const FuzzyRule& r : rb.rules) {
        const double w = std::exp(log_activation(r) - max_lw);
        num += w * r.consequent_s;
        den += w;
    }
    return num / den;
}

std::vector<FacialFeatures> feature_trace(const std::vector<LandmarkFrame>& frames) {
    std::vector<FacialFeatures> feats(frames.size());
    std::vector<bool> valid(frames.size(), false);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        try {
            feats[i] = facial_features(frames[i]);
            valid[i] = true;
        } catch (const std::domain_error&) {
            // held below
        }
    }
    std::size_t first_valid = frames.size();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (valid[i]) {
            first_valid = i;
            break;
        }
    }
    if (first_valid == frames.size()) {
        throw std::domain_error("feature_trace: no valid frames");
    }
    for (std::size_t i = 0; i < first_valid; ++i) feats[i] = feats[first_valid];
    for (std::size_t i = first_valid + 1; i < frames.size(); ++i) {
        if (!valid[i]) feats[i] = feats[i - 1];
    }
    return feats;
}

std::vector<double> reaction_time_trace(const std::vector<LandmarkFrame>& frames,
                                        const FuzzyRuleBase& rb,
                                        std::size_t window) {
    if (window < 1) {
        throw std::invalid_argument("reaction_time_trace: window must be >= 1");
    }
    const std::vector<FacialFeatures> feats = feature_trace(frames);
    std::vector<double> out(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const std::size_t lo = (i + 1 >= window) ? i + 1 - window : 0;
        FacialFeatures avg;
        for (std::size_t j = lo; j <= i; ++j) {
            avg.efv += feats[j].efv;
            avg.mfv += feats[j].mfv;
            avg.entropy += feats[j].entropy;
        }
        const double m = static_cast<double>(i - lo + 1);
        avg.efv /= m;
        avg.mfv /= m;
        avg.entropy /= m;
        out[i] = infer_reaction_time(avg, rb);
    }
    return out;
}

std::vector<LandmarkFrame> load_landmark_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open landmark file: " + path);
    }
    std::string line;
    long row = 0;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("landmark csv row " + std::to_string(row) + ": " + what);
    };

    if (!std::getline(in, line)) fail("missing header");
    ++row;
    if (line == "frame,point,x,y\r") line.pop_back();
    if (line != "frame,point,x,y") fail("header must be exactly 'frame,point,x,y'");

    std::vector<LandmarkFrame> frames;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        long frame = 0, point = 0;
        double x = 0.0, y = 0.0;
        try {
            if (!std::getline(ss, tok, ',')) fail("missing frame field");
            frame = std::stol(tok);
            if (!std::getline(ss, tok, ',')) fail("missing point field");
            point = std::stol(tok);
            if (!std::getline(ss, tok, ',')) fail("missing x field");
            x = std::stod(tok);
            if (!std::getline(ss, tok, ',')) fail("missing y field");
            y = std::stod(tok);
        } catch (const std::logic_error&) {
            fail("malformed number");
        }
        if (!std::isfinite(x) || !std::isfinite(y)) fail("non-finite coordinate");

        if (frames.empty() || frames.back().frame_index != frame) {
            if (!frames.empty()) {
                if (frame <= frames.back().frame_index) {
                    fail("frame indices must be strictly increasing");
                }
                if (frames.back().points.size() < 18) {
                    fail("previous frame has fewer than 18 points");
                }
            }
            if (point != 1) fail("points must start at 1 for each frame");
            frames.push_back({frame, {}});
        } else if (point != static_cast<long>(frames.back().points.size()) + 1) {
            fail("points must be contiguous 1..N within a frame");
        }
        frames.back().points.push_back({x, y});
    }
    if (!frames.empty() && frames.back().points.size() < 18) {
        throw std::runtime_error("landmark csv: last frame has fewer than 18 points");
    }
    return frames;
}

}  // namespace hmvf
