#ifndef EVCAS_TRADEOFF_HPP
#define EVCAS_TRADEOFF_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace evcas {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// g(x) = alpha / (x - beta)^2 + gamma on [dom_start, next piece start)
struct TradeoffPiece {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double dom_start = 0.0;

    double eval(double x) const;
    double deriv(double x) const;
};

class ConsumptionFunction {
public:
    std::vector<TradeoffPiece> pieces;
    double tau_min = 0.0;
    double tau_max = 0.0;

    static ConsumptionFunction constant(double time, double value);
    static ConsumptionFunction single(double alpha, double beta, double gamma, double tmin, double tmax);

    bool is_constant() const { return tau_max <= tau_min; }
    std::size_t size() const { return pieces.size(); }

    double eval(double x) const;
    double operator()(double x) const { return eval(x); }
    double value_at_min() const;
    double value_at_max() const;

    std::size_t piece_index(double x) const;
    double piece_end(std::size_t i) const;
    // piece covering x on [tau_min, inf); the flat tail is reported as an alpha = 0 piece
    TradeoffPiece piece_at(double x) const;
    // right derivative (0 beyond tau_max)
    double right_deriv(double x) const;
    // piece starts followed by tau_max
    std::vector<double> breakpoints() const;

    ConsumptionFunction shifted(double dt, double de) const;
    ConsumptionFunction restricted(double lo, double hi) const;

    bool valid(std::string* why = nullptr) const;
};

using CF = ConsumptionFunction;

std::optional<double> inverse(const CF& c, double e);

// Time on the second operand of a link as a function of total time x.
// second_fixed: delta(x) = value; first_fixed: delta(x) = x - value;
// proportional: delta(x) = x - (x - lambda) / mu
enum class DeltaKind : std::uint8_t { second_fixed, first_fixed, proportional };

struct DeltaPiece {
    double dom_start = 0.0;
    DeltaKind kind = DeltaKind::second_fixed;
    double value = 0.0;
    double lambda = 0.0;
    double mu = 1.0;

    double eval(double x) const;
};

struct DeltaRecord {
    std::vector<DeltaPiece> pieces;
    double tau_min = 0.0;
    double tau_max = 0.0;

    // time spent on the second operand; x is clamped to [tau_min, tau_max]
    double eval(double x) const;
};

struct LinkResult {
    CF cost;
    DeltaRecord delta;
};

LinkResult link_single(const CF& c1, const CF& c2);
LinkResult link_linear(const CF& c1, const CF& c2);
LinkResult link_naive(const CF& c1, const CF& c2);
CF link(const CF& c1, const CF& c2);

bool is_convex(const CF& c, double tol = 1e-9);

std::optional<double> extreme_point(const TradeoffPiece& p1, const TradeoffPiece& p2);

// max of (p - q) on [a, b], both pieces valid there
double max_piece_difference(const TradeoffPiece& p, const TradeoffPiece& q, double a, double b);

bool dominates_pairwise(const CF& c1, const CF& c2, double slack = 0.0);

struct TrimStats {
    std::uint64_t checks = 0;
};

std::optional<CF> trim_dominated(const CF& c, const std::vector<const CF*>& settled, double slack = 0.0,
                                 TrimStats* stats = nullptr);

std::optional<CF> clamp_battery(const CF& c, double capacity, double target_lb = 0.0);

std::string to_record(const CF& c);
CF parse_record(const std::vector<std::string>& tokens, std::size_t& pos);

double value_tolerance(double v);

}  // namespace evcas

#endif
