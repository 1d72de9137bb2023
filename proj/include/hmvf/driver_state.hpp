#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace hmvf {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// One frame of facial landmark coordinates.
///
/// Indexing follows the ingestion convention: points[0..5] are the eye
/// landmarks p1..p6 (p1/p4 the corners, p2-p6 and p3-p5 the vertical pairs),
/// points[10..17] are the mouth landmarks p11..p18 (p11/p15 the corners,
/// p12-p16, p13-p17, p14-p18 the vertical pairs). The full set feeds the
/// motion-entropy statistic. At least 18 points per frame.
struct LandmarkFrame {
    long frame_index = 0;
    std::vector<Point2> points;
};

struct FacialFeatures {
    double efv = 0.0;      // eye feature vector, vertical/horizontal ratio
    double mfv = 0.0;      // mouth feature vector
    double entropy = 0.0;  // motion entropy of landmark-centroid distances [nats]
};

/// Gaussian antecedent exp(-(x-c)^2 / (2 sigma^2)).
struct GaussianSet {
    double center = 0.0;
    double sigma = 1.0;

    bool operator==(const GaussianSet&) const = default;
};

/// One fuzzy rule: Gaussian antecedents over (EFV, MFV, H_F) and a crisp
/// reaction-time consequent in seconds.
struct FuzzyRule {
    GaussianSet efv;
    GaussianSet mfv;
    GaussianSet entropy;
    double consequent_s = 0.5;

    bool operator==(const FuzzyRule&) const = default;
};

/// Product-t-norm rule base; exactly 16 rules.
struct FuzzyRuleBase {
    std::vector<FuzzyRule> rules;

    bool operator==(const FuzzyRuleBase&) const = default;
    void validate() const;
    double min_consequent() const;
    double max_consequent() const;

    /// Shipped default: 4 EFV sets x 2 MFV sets x 2 H_F sets, consequents
    /// spanning 0.1 s to 2.0 s. Lower EFV, higher MFV and higher entropy all
    /// push the inferred reaction time up.
    static FuzzyRuleBase default_base();
};

double eye_feature(const LandmarkFrame& f);
double mouth_feature(const LandmarkFrame& f);

/// Shannon entropy of binned landmark-to-centroid distances. Bins have width
/// mu/sigma of the distance sample; a zero-spread sample (all distances
/// equal) is a single bin and returns 0 by convention.
double motion_entropy(const LandmarkFrame& f);

FacialFeatures facial_features(const LandmarkFrame& f);

double gaussian_membership(double x, double center, double sigma);

/// Product of the three antecedent memberships; always in (0, 1].
double rule_activation(const FacialFeatures& ft, const FuzzyRule& r);

/// Weighted-average (centroid, with singleton consequents) defuzzification:
/// R = sum(w_j y_j) / sum(w_j). Result lies in [min y_j, max y_j].
double infer_reaction_time(const FacialFeatures& ft, const FuzzyRuleBase& rb);

/// Per-frame features with the hold-last policy: degenerate frames
/// (coincident eye or mouth corners) keep the previous frame's features,
/// leading degenerate frames take the first valid ones. Throws if no frame
/// is valid.
std::vector<FacialFeatures> feature_trace(const std::vector<LandmarkFrame>& frames);

/// Per-frame reaction-time estimates: hold-last features, averaged over a
/// trailing window, then inferred. Output has one entry per input frame.
std::vector<double> reaction_time_trace(const std::vector<LandmarkFrame>& frames,
                                        const FuzzyRuleBase& rb,
                                        std::size_t window);

/// Landmark CSV ingestion. Format (bit-exact header): `frame,point,x,y`, one
/// row per point, points contiguous 1..N per frame, frames strictly
/// increasing. Parse/shape errors report the offending row number.
std::vector<LandmarkFrame> load_landmark_csv(const std::string& path);

}  // namespace hmvf
