#pragma once

#include <optional>
#include <vector>

#include "ideflow/rational.hpp"

namespace ideflow {

// Right-constant step function of time.
//
// f(t) = 0 for t < breakpoints.front(); values[i] on [breakpoints[i], breakpoints[i+1]);
// values.back() on [breakpoints.back(), +inf). The empty function is identically zero.
// Canonical form: breakpoints strictly increasing, no two consecutive equal values, and
// no leading zero piece (the region left of the domain is zero anyway).
class StepFn {
   public:
    StepFn() = default;
    StepFn(std::vector<Rational> breakpoints, std::vector<Rational> values);

    static StepFn zero() { return StepFn(); }
    // v * 1_{[a, b)}
    static StepFn pulse(const Rational& a, const Rational& b, const Rational& v);
    static StepFn constant_from(const Rational& a, const Rational& v);

    bool is_zero() const { return bps_.empty(); }
    const std::vector<Rational>& breakpoints() const { return bps_; }
    const std::vector<Rational>& values() const { return vals_; }

    Rational left_bound() const { return bps_.empty() ? Rational(0) : bps_.front(); }
    Rational tail_value() const { return vals_.empty() ? Rational(0) : vals_.back(); }
    bool has_bounded_support() const { return tail_value() == 0; }

    Rational operator()(const Rational& t) const;
    // Right limit f(t+), which for a right-constant function equals f(t).
    Rational value_right(const Rational& t) const { return (*this)(t); }

    StepFn shifted(const Rational& d) const;
    StepFn scaled(const Rational& c) const;

    bool nonnegative() const;
    // Last breakpoint after which the function is constant (0 for the zero function).
    Rational last_breakpoint() const { return bps_.empty() ? Rational(0) : bps_.back(); }

    // Exact integral over [a, b].
    Rational integral(const Rational& a, const Rational& b) const;
    // Exact integral of t*f(t) over [a, b]  (moment, used by the travel-time formulas).
    Rational moment(const Rational& a, const Rational& b) const;

    bool operator==(const StepFn& o) const { return bps_ == o.bps_ && vals_ == o.vals_; }

   private:
    std::vector<Rational> bps_;
    std::vector<Rational> vals_;
    void canonicalize();
    friend StepFn step_combine(const StepFn&, const StepFn&, int);
};

StepFn step_add(const StepFn& a, const StepFn& b);
StepFn step_sub(const StepFn& a, const StepFn& b);
// a(t) <= b(t) for all t.
bool step_le(const StepFn& a, const StepFn& b);

enum class PwlOp { add, sub, min };

// Continuous piecewise-linear function of time.
//
// Values vals[i] at bps[i], linear in between; constant left of bps.front();
// slope tail_slope right of bps.back(). Total on all of Q.
class Pwl {
   public:
    Pwl() : bps_{Rational(0)}, vals_{Rational(0)}, tail_slope_(0) {}
    Pwl(std::vector<Rational> breakpoints, std::vector<Rational> values,
        Rational tail_slope = Rational(0));

    static Pwl constant(const Rational& c) { return Pwl({Rational(0)}, {c}); }

    const std::vector<Rational>& breakpoints() const { return bps_; }
    const std::vector<Rational>& values() const { return vals_; }
    const Rational& tail_slope() const { return tail_slope_; }

    Rational operator()(const Rational& t) const;
    // Right derivative at t (the slope of the piece starting at or covering t).
    Rational slope_right(const Rational& t) const;

    Pwl shifted(const Rational& d) const;
    Pwl scaled(const Rational& c) const;

    std::optional<Rational> first_root_at_or_after(const Rational& t0) const;

    bool nonnegative_on(const Rational& a, const Rational& b) const;
    Rational min_on(const Rational& a, const Rational& b) const;
    Rational max_on(const Rational& a, const Rational& b) const;

    // Exact integral over [a, b] (trapezoid per piece).
    Rational integral(const Rational& a, const Rational& b) const;

    bool operator==(const Pwl& o) const {
        return bps_ == o.bps_ && vals_ == o.vals_ && tail_slope_ == o.tail_slope_;
    }
    // Functional equality restricted to [a, b].
    bool equals_on(const Pwl& o, const Rational& a, const Rational& b) const;

   private:
    std::vector<Rational> bps_;   // strictly increasing, nonempty
    std::vector<Rational> vals_;  // one per breakpoint
    Rational tail_slope_;
    void canonicalize();
    friend Pwl pwl_combine(const Pwl&, const Pwl&, PwlOp);
};

Pwl pwl_combine(const Pwl& a, const Pwl& b, PwlOp op);
inline Pwl pwl_add(const Pwl& a, const Pwl& b) { return pwl_combine(a, b, PwlOp::add); }
inline Pwl pwl_sub(const Pwl& a, const Pwl& b) { return pwl_combine(a, b, PwlOp::sub); }
inline Pwl pwl_min(const Pwl& a, const Pwl& b) { return pwl_combine(a, b, PwlOp::min); }

// Cumulative G(t) = integral of f from its left bound; G is 0 left of the domain.
Pwl stepfn_integrate(const StepFn& f);

}  // namespace ideflow
