#pragma once

#include "gsq/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsq {

enum class DistKind { Exponential, Deterministic, Erlang, HyperExp2 };

inline std::string to_string(DistKind k) {
    switch (k) {
        case DistKind::Exponential: return "exponential";
        case DistKind::Deterministic: return "deterministic";
        case DistKind::Erlang: return "erlang";
        case DistKind::HyperExp2: return "hyperexponential2";
    }
    return "?";
}

/// Parametric nonnegative duration distribution used for interarrival,
/// service and patience times. Closed-form moments are part of the contract:
/// tests use them as oracles, and stationary rates are derived as 1/mean().
class ServiceDistribution {
public:
    ServiceDistribution() = default;

    static ServiceDistribution exponential(double rate) {
        ServiceDistribution d;
        d.kind_ = DistKind::Exponential;
        d.rate1_ = rate;
        return d;
    }

    static ServiceDistribution deterministic(double value) {
        ServiceDistribution d;
        d.kind_ = DistKind::Deterministic;
        d.value_ = value;
        return d;
    }

    static ServiceDistribution erlang(int shape, double rate) {
        ServiceDistribution d;
        d.kind_ = DistKind::Erlang;
        d.shape_ = shape;
        d.rate1_ = rate;
        return d;
    }

    /// Mixture of Exp(rate1) with probability p and Exp(rate2) otherwise.
    static ServiceDistribution hyperexp2(double rate1, double rate2, double p) {
        ServiceDistribution d;
        d.kind_ = DistKind::HyperExp2;
        d.rate1_ = rate1;
        d.rate2_ = rate2;
        d.mix_p_ = p;
        return d;
    }

    DistKind kind() const { return kind_; }
    double rate1() const { return rate1_; }
    double rate2() const { return rate2_; }
    double value() const { return value_; }
    int shape() const { return shape_; }
    double mix_p() const { return mix_p_; }

    double mean() const {
        switch (kind_) {
            case DistKind::Exponential: return 1.0 / rate1_;
            case DistKind::Deterministic: return value_;
            case DistKind::Erlang: return static_cast<double>(shape_) / rate1_;
            case DistKind::HyperExp2:
                return mix_p_ / rate1_ + (1.0 - mix_p_) / rate2_;
        }
        return 0.0;
    }

    double variance() const {
        switch (kind_) {
            case DistKind::Exponential: return 1.0 / (rate1_ * rate1_);
            case DistKind::Deterministic: return 0.0;
            case DistKind::Erlang: return static_cast<double>(shape_) / (rate1_ * rate1_);
            case DistKind::HyperExp2: {
                const double m2 = 2.0 * mix_p_ / (rate1_ * rate1_) +
                                  2.0 * (1.0 - mix_p_) / (rate2_ * rate2_);
                const double m = mean();
                return m2 - m * m;
            }
        }
        return 0.0;
    }

    /// Stationary rate 1/mean.
    double rate() const { return 1.0 / mean(); }

    double sample(RngStream& rng) const {
        switch (kind_) {
            case DistKind::Exponential:
                return -std::log(rng.uniform01()) / rate1_;
            case DistKind::Deterministic:
                return value_;
            case DistKind::Erlang: {
                double sum_log = 0.0;
                for (int i = 0; i < shape_; ++i) sum_log += std::log(rng.uniform01());
                return -sum_log / rate1_;
            }
            case DistKind::HyperExp2: {
                const double branch = rng.uniform01();
                const double r = branch < mix_p_ ? rate1_ : rate2_;
                return -std::log(rng.uniform01()) / r;
            }
        }
        return 0.0;
    }

    /// Same shape, time-rescaled so that 1/mean equals `target_rate`.
    ServiceDistribution scaled_to_rate(double target_rate) const {
        if (!(target_rate > 0.0)) throw std::invalid_argument("target rate must be positive");
        const double factor = target_rate * mean();
        ServiceDistribution d = *this;
        switch (kind_) {
            case DistKind::Exponential:
            case DistKind::Erlang:
                d.rate1_ = rate1_ * factor;
                break;
            case DistKind::Deterministic:
                d.value_ = value_ / factor;
                break;
            case DistKind::HyperExp2:
                d.rate1_ = rate1_ * factor;
                d.rate2_ = rate2_ * factor;
                break;
        }
        return d;
    }

    /// Structural parameter checks; empty result means usable.
    std::vector<std::string> parameter_violations() const {
        std::vector<std::string> v;
        auto positive = [&](double x, const char* name) {
            if (!(x > 0.0) || !std::isfinite(x))
                v.push_back(std::string(name) + " must be strictly positive");
        };
        switch (kind_) {
            case DistKind::Exponential:
                positive(rate1_, "rate");
                break;
            case DistKind::Deterministic:
                positive(value_, "value");
                break;
            case DistKind::Erlang:
                if (shape_ < 1) v.push_back("shape must be an integer >= 1");
                positive(rate1_, "rate");
                break;
            case DistKind::HyperExp2:
                positive(rate1_, "rate");
                positive(rate2_, "rate2");
                if (!(mix_p_ >= 0.0 && mix_p_ <= 1.0))
                    v.push_back("p must lie in [0,1]");
                break;
        }
        return v;
    }

    friend bool operator==(const ServiceDistribution& a, const ServiceDistribution& b) {
        if (a.kind_ != b.kind_) return false;
        switch (a.kind_) {
            case DistKind::Exponential: return a.rate1_ == b.rate1_;
            case DistKind::Deterministic: return a.value_ == b.value_;
            case DistKind::Erlang: return a.shape_ == b.shape_ && a.rate1_ == b.rate1_;
            case DistKind::HyperExp2:
                return a.rate1_ == b.rate1_ && a.rate2_ == b.rate2_ && a.mix_p_ == b.mix_p_;
        }
        return false;
    }

private:
    DistKind kind_ = DistKind::Exponential;
    double rate1_ = 1.0;
    double rate2_ = 1.0;
    double value_ = 1.0;
    int shape_ = 1;
    double mix_p_ = 1.0;
};

}  // namespace gsq
