#include "ideflow/step_function.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace ideflow {

// ---------------------------------------------------------------------------
// StepFn

StepFn::StepFn(std::vector<Rational> breakpoints, std::vector<Rational> values)
    : bps_(std::move(breakpoints)), vals_(std::move(values)) {
    if (bps_.size() != vals_.size())
        throw std::invalid_argument("StepFn: |values| != |breakpoints|");
    for (size_t i = 1; i < bps_.size(); ++i)
        if (!(bps_[i - 1] < bps_[i]))
            throw std::invalid_argument("StepFn: breakpoints not strictly increasing");
    canonicalize();
}

void StepFn::canonicalize() {
    size_t lead = 0;
    while (lead < vals_.size() && vals_[lead] == 0) ++lead;
    if (lead > 0) {
        bps_.erase(bps_.begin(), bps_.begin() + static_cast<long>(lead));
        vals_.erase(vals_.begin(), vals_.begin() + static_cast<long>(lead));
    }
    size_t w = 0;
    for (size_t i = 0; i < vals_.size(); ++i) {
        if (w > 0 && vals_[i] == vals_[w - 1]) continue;
        bps_[w] = bps_[i];
        vals_[w] = vals_[i];
        ++w;
    }
    bps_.resize(w);
    vals_.resize(w);
}

StepFn StepFn::pulse(const Rational& a, const Rational& b, const Rational& v) {
    if (!(a < b)) throw std::invalid_argument("StepFn::pulse: empty interval");
    return StepFn({a, b}, {v, Rational(0)});
}

StepFn StepFn::constant_from(const Rational& a, const Rational& v) {
    return StepFn({a}, {v});
}

Rational StepFn::operator()(const Rational& t) const {
    if (bps_.empty() || t < bps_.front()) return Rational(0);
    // Last breakpoint <= t.
    auto it = std::upper_bound(bps_.begin(), bps_.end(), t);
    return vals_[static_cast<size_t>(it - bps_.begin()) - 1];
}

StepFn StepFn::shifted(const Rational& d) const {
    StepFn out = *this;
    for (auto& b : out.bps_) b += d;
    return out;
}

StepFn StepFn::scaled(const Rational& c) const {
    StepFn out = *this;
    for (auto& v : out.vals_) v *= c;
    out.canonicalize();
    return out;
}

bool StepFn::nonnegative() const {
    for (const auto& v : vals_)
        if (v < 0) return false;
    return true;
}

Rational StepFn::integral(const Rational& a, const Rational& b) const {
    if (!(a <= b)) throw std::invalid_argument("StepFn::integral: a > b");
    Rational acc(0);
    for (size_t i = 0; i < bps_.size(); ++i) {
        if (vals_[i] == 0) continue;
        Rational lo = rat_max(a, bps_[i]);
        Rational hi = (i + 1 < bps_.size()) ? rat_min(b, bps_[i + 1]) : b;
        if (lo < hi) acc += vals_[i] * (hi - lo);
    }
    return acc;
}

Rational StepFn::moment(const Rational& a, const Rational& b) const {
    if (!(a <= b)) throw std::invalid_argument("StepFn::moment: a > b");
    Rational acc(0);
    for (size_t i = 0; i < bps_.size(); ++i) {
        if (vals_[i] == 0) continue;
        Rational lo = rat_max(a, bps_[i]);
        Rational hi = (i + 1 < bps_.size()) ? rat_min(b, bps_[i + 1]) : b;
        if (lo < hi) acc += vals_[i] * (hi * hi - lo * lo) / 2;
    }
    return acc;
}

StepFn step_combine(const StepFn& a, const StepFn& b, int sign) {
    std::vector<Rational> bps;
    bps.reserve(a.bps_.size() + b.bps_.size());
    std::merge(a.bps_.begin(), a.bps_.end(), b.bps_.begin(), b.bps_.end(),
               std::back_inserter(bps));
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    std::vector<Rational> vals;
    vals.reserve(bps.size());
    for (const auto& t : bps) vals.push_back(a(t) + Rational(sign) * b(t));
    return StepFn(std::move(bps), std::move(vals));
}

StepFn step_add(const StepFn& a, const StepFn& b) { return step_combine(a, b, +1); }
StepFn step_sub(const StepFn& a, const StepFn& b) { return step_combine(a, b, -1); }

bool step_le(const StepFn& a, const StepFn& b) {
    StepFn d = step_sub(b, a);
    return d.nonnegative();
}

// ---------------------------------------------------------------------------
// Pwl

Pwl::Pwl(std::vector<Rational> breakpoints, std::vector<Rational> values, Rational tail_slope)
    : bps_(std::move(breakpoints)), vals_(std::move(values)), tail_slope_(std::move(tail_slope)) {
    if (bps_.empty() || bps_.size() != vals_.size())
        throw std::invalid_argument("Pwl: bad breakpoint/value arrays");
    for (size_t i = 1; i < bps_.size(); ++i)
        if (!(bps_[i - 1] < bps_[i]))
            throw std::invalid_argument("Pwl: breakpoints not strictly increasing");
    canonicalize();
}

void Pwl::canonicalize() {
    if (bps_.size() < 2) return;
    std::vector<Rational> nb{bps_.front()}, nv{vals_.front()};
    for (size_t i = 1; i < bps_.size(); ++i) {
        // Drop breakpoint i when the slope into it equals the slope out of it.
        Rational s_in = (vals_[i] - nv.back()) / (bps_[i] - nb.back());
        Rational s_out = (i + 1 < bps_.size())
                             ? (vals_[i + 1] - vals_[i]) / (bps_[i + 1] - bps_[i])
                             : tail_slope_;
        if (s_in == s_out) continue;
        nb.push_back(bps_[i]);
        nv.push_back(vals_[i]);
    }
    bps_ = std::move(nb);
    vals_ = std::move(nv);
}

Rational Pwl::operator()(const Rational& t) const {
    if (t <= bps_.front()) return vals_.front();
    if (t >= bps_.back()) return vals_.back() + tail_slope_ * (t - bps_.back());
    auto it = std::upper_bound(bps_.begin(), bps_.end(), t);
    size_t i = static_cast<size_t>(it - bps_.begin()) - 1;
    Rational s = (vals_[i + 1] - vals_[i]) / (bps_[i + 1] - bps_[i]);
    return vals_[i] + s * (t - bps_[i]);
}

Rational Pwl::slope_right(const Rational& t) const {
    if (t >= bps_.back()) return tail_slope_;
    if (t < bps_.front()) return Rational(0);
    auto it = std::upper_bound(bps_.begin(), bps_.end(), t);
    size_t i = static_cast<size_t>(it - bps_.begin());
    if (i == 0) i = 1;
    return (vals_[i] - vals_[i - 1]) / (bps_[i] - bps_[i - 1]);
}

Pwl Pwl::shifted(const Rational& d) const {
    Pwl out = *this;
    for (auto& b : out.bps_) b += d;
    return out;
}

Pwl Pwl::scaled(const Rational& c) const {
    Pwl out = *this;
    for (auto& v : out.vals_) v *= c;
    out.tail_slope_ *= c;
    out.canonicalize();
    return out;
}

std::optional<Rational> Pwl::first_root_at_or_after(const Rational& t0) const {
    // Scan pieces intersecting [t0, inf); within each the function is linear.
    auto root_on = [&](const Rational& x, const Rational& vx, const Rational& slope,
                       const std::optional<Rational>& y) -> std::optional<Rational> {
        Rational start = rat_max(x, t0);
        Rational v_start = vx + slope * (start - x);
        if (y && !(start < *y)) return std::nullopt;
        if (v_start == 0) return start;
        if (slope == 0) return std::nullopt;
        Rational r = start + (-v_start) / slope;
        if (r < start) return std::nullopt;
        if (y && r >= *y) return std::nullopt;  // root belongs to a later piece if at *y
        return r;
    };
    // Region left of the domain: constant vals_.front().
    if (t0 < bps_.front()) {
        if (vals_.front() == 0) return t0;
    }
    for (size_t i = 0; i + 1 < bps_.size(); ++i) {
        if (bps_[i + 1] <= t0) continue;
        Rational s = (vals_[i + 1] - vals_[i]) / (bps_[i + 1] - bps_[i]);
        if (auto r = root_on(bps_[i], vals_[i], s, bps_[i + 1])) return r;
    }
    return root_on(bps_.back(), vals_.back(), tail_slope_, std::nullopt);
}

bool Pwl::nonnegative_on(const Rational& a, const Rational& b) const {
    return min_on(a, b) >= 0;
}

Rational Pwl::min_on(const Rational& a, const Rational& b) const {
    if (!(a <= b)) throw std::invalid_argument("Pwl::min_on: a > b");
    Rational m = (*this)(a);
    Rational vb = (*this)(b);
    if (vb < m) m = vb;
    for (const auto& t : bps_)
        if (a < t && t < b) {
            Rational v = (*this)(t);
            if (v < m) m = v;
        }
    return m;
}

Rational Pwl::max_on(const Rational& a, const Rational& b) const {
    if (!(a <= b)) throw std::invalid_argument("Pwl::max_on: a > b");
    Rational m = (*this)(a);
    Rational vb = (*this)(b);
    if (vb > m) m = vb;
    for (const auto& t : bps_)
        if (a < t && t < b) {
            Rational v = (*this)(t);
            if (v > m) m = v;
        }
    return m;
}

Rational Pwl::integral(const Rational& a, const Rational& b) const {
    if (!(a <= b)) throw std::invalid_argument("Pwl::integral: a > b");
    // Collect cut points: a, b, and interior breakpoints.
    std::vector<Rational> cuts{a};
    for (const auto& t : bps_)
        if (a < t && t < b) cuts.push_back(t);
    cuts.push_back(b);
    Rational acc(0);
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        Rational lo = cuts[i], hi = cuts[i + 1];
        acc += ((*this)(lo) + (*this)(hi)) * (hi - lo) / 2;
    }
    return acc;
}

bool Pwl::equals_on(const Pwl& o, const Rational& a, const Rational& b) const {
    Pwl d = pwl_sub(*this, o);
    if (d(a) != 0 || d(b) != 0) return false;
    for (const auto& t : d.breakpoints())
        if (a < t && t < b && d(t) != 0) return false;
    return true;
}

Pwl pwl_combine(const Pwl& a, const Pwl& b, PwlOp op) {
    std::vector<Rational> bps;
    bps.reserve(a.bps_.size() + b.bps_.size());
    std::merge(a.bps_.begin(), a.bps_.end(), b.bps_.begin(), b.bps_.end(),
               std::back_inserter(bps));
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    if (op == PwlOp::min) {
        // Insert exact crossing points of a and b.
        std::vector<Rational> extra;
        auto add_crossing = [&](const Rational& x, const std::optional<Rational>& y) {
            Rational va = a(x), vb = b(x);
            Rational sa = a.slope_right(x), sb = b.slope_right(x);
            if (sa == sb) return;
            Rational c = x + (vb - va) / (sa - sb);
            if (c > x && (!y || c < *y)) extra.push_back(c);
        };
        for (size_t i = 0; i + 1 < bps.size(); ++i) add_crossing(bps[i], bps[i + 1]);
        add_crossing(bps.back(), std::nullopt);
        if (!extra.empty()) {
            bps.insert(bps.end(), extra.begin(), extra.end());
            std::sort(bps.begin(), bps.end());
            bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
        }
    }

    std::vector<Rational> vals;
    vals.reserve(bps.size());
    for (const auto& t : bps) {
        Rational va = a(t), vb = b(t);
        switch (op) {
            case PwlOp::add: vals.push_back(va + vb); break;
            case PwlOp::sub: vals.push_back(va - vb); break;
            case PwlOp::min: vals.push_back(rat_min(va, vb)); break;
        }
    }
    Rational tail;
    switch (op) {
        case PwlOp::add: tail = a.tail_slope_ + b.tail_slope_; break;
        case PwlOp::sub: tail = a.tail_slope_ - b.tail_slope_; break;
        case PwlOp::min: {
            // All crossings were inserted as breakpoints, so past the last breakpoint
            // the min follows a single branch (or the smaller slope at a tie).
            Rational x = bps.back();
            if (a(x) == b(x))
                tail = rat_min(a.tail_slope_, b.tail_slope_);
            else
                tail = a(x) < b(x) ? a.tail_slope_ : b.tail_slope_;
            break;
        }
    }
    return Pwl(std::move(bps), std::move(vals), tail);
}

Pwl stepfn_integrate(const StepFn& f) {
    if (f.is_zero()) return Pwl::constant(Rational(0));
    const auto& bps = f.breakpoints();
    const auto& vals = f.values();
    std::vector<Rational> gb{bps.front()};
    std::vector<Rational> gv{Rational(0)};
    Rational acc(0);
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
        acc += vals[i] * (bps[i + 1] - bps[i]);
        gb.push_back(bps[i + 1]);
        gv.push_back(acc);
    }
    return Pwl(std::move(gb), std::move(gv), vals.back());
}

}  // namespace ideflow
