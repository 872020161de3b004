#include "crpq/approximation.hpp"

#include <algorithm>

#include "crpq/decomposition.hpp"

namespace crpq {

// ---- BigUint ----------------------------------------------------------

namespace {
constexpr uint32_t kBase = 1000000000u;
}

BigUint::BigUint(uint64_t v) {
    while (v) {
        limbs_.push_back(uint32_t(v % kBase));
        v /= kBase;
    }
    if (limbs_.empty()) limbs_.push_back(0);
}

void BigUint::trim() {
    while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
}

BigUint& BigUint::operator+=(const BigUint& o) {
    uint64_t carry = 0;
    size_t n = std::max(limbs_.size(), o.limbs_.size());
    limbs_.resize(n, 0);
    for (size_t i = 0; i < n; ++i) {
        uint64_t s = carry + limbs_[i] + (i < o.limbs_.size() ? o.limbs_[i] : 0);
        limbs_[i] = uint32_t(s % kBase);
        carry = s / kBase;
    }
    if (carry) limbs_.push_back(uint32_t(carry));
    return *this;
}

BigUint& BigUint::operator-=(uint64_t v) {
    BigUint o(v);
    int64_t borrow = 0;
    for (size_t i = 0; i < limbs_.size(); ++i) {
        int64_t s = int64_t(limbs_[i]) - borrow - (i < o.limbs_.size() ? o.limbs_[i] : 0);
        if (s < 0) {
            s += kBase;
            borrow = 1;
        } else {
            borrow = 0;
        }
        limbs_[i] = uint32_t(s);
    }
    if (borrow) throw std::invalid_argument("BigUint underflow");
    trim();
    return *this;
}

BigUint& BigUint::operator*=(uint64_t v) {
    if (v >= kBase) {
        BigUint lo = *this, hi = *this;
        lo *= v % kBase;
        hi *= v / kBase;
        // hi shifted by one limb.
        hi.limbs_.insert(hi.limbs_.begin(), 0);
        hi += lo;
        *this = hi;
        return *this;
    }
    uint64_t carry = 0;
    for (size_t i = 0; i < limbs_.size(); ++i) {
        uint64_t s = uint64_t(limbs_[i]) * v + carry;
        limbs_[i] = uint32_t(s % kBase);
        carry = s / kBase;
    }
    while (carry) {
        limbs_.push_back(uint32_t(carry % kBase));
        carry /= kBase;
    }
    trim();
    return *this;
}

BigUint BigUint::pow(uint64_t base, uint64_t exp) {
    BigUint r(1);
    for (uint64_t i = 0; i < exp; ++i) r *= base;
    return r;
}

bool BigUint::fits_u64() const {
    BigUint max(UINT64_MAX);
    return !(*this > max);
}

uint64_t BigUint::as_u64_saturating() const {
    if (!fits_u64()) return UINT64_MAX;
    uint64_t v = 0;
    for (size_t i = limbs_.size(); i > 0; --i) v = v * kBase + limbs_[i - 1];
    return v;
}

std::string BigUint::str() const {
    std::string s = std::to_string(limbs_.back());
    for (size_t i = limbs_.size() - 1; i > 0; --i) {
        std::string part = std::to_string(limbs_[i - 1]);
        s += std::string(9 - part.size(), '0') + part;
    }
    return s;
}

std::strong_ordering BigUint::operator<=>(const BigUint& o) const {
    if (limbs_.size() != o.limbs_.size()) return limbs_.size() <=> o.limbs_.size();
    for (size_t i = limbs_.size(); i > 0; --i)
        if (limbs_[i - 1] != o.limbs_[i - 1]) return limbs_[i - 1] <=> o.limbs_[i - 1];
    return std::strong_ordering::equal;
}

// ---- WidthClass --------------------------------------------------------

std::string WidthClass::str() const {
    switch (kind) {
        case WidthKind::TreeWidth: return "tw(" + std::to_string(k) + ")";
        case WidthKind::PathWidth: return "pw(" + std::to_string(k) + ")";
        case WidthKind::ContractedTreeWidth: return "ctw(" + std::to_string(k) + ")";
        case WidthKind::ContractedPathWidth: return "cpw(" + std::to_string(k) + ")";
        case WidthKind::OneWayContractedTreeWidth: return "octw(" + std::to_string(k) + ")";
        case WidthKind::OneWayContractedPathWidth: return "ocpw(" + std::to_string(k) + ")";
    }
    return "?";
}

int WidthClass::width_of(const C2rpq& q) const {
    C2rpq target = q;
    if (contracted())
        target = contract(q, one_way() ? ContractionMode::OneWay : ContractionMode::TwoWay);
    Multigraph g = underlying_multigraph(target);
    if (path_based()) return exact_pathwidth(g).first;
    return exact_treewidth(g).first;
}

bool WidthClass::admits(const C2rpq& q) const {
    if (one_way() && q.uses_inverses()) return false;
    return width_of(q) <= k;
}

WidthBound width_bound(size_t atom_count, const WidthClass& cls) {
    uint64_t n = atom_count, k = uint64_t(cls.k);
    WidthBound wb;
    bool contracted_tw1 = (cls.kind == WidthKind::ContractedTreeWidth ||
                           cls.kind == WidthKind::OneWayContractedTreeWidth) &&
                          cls.k == 1;
    if (contracted_tw1) {
        // Cubic bound with documented constant 8.
        BigUint ell(8);
        ell *= n;
        ell *= n;
        ell *= n;
        wb.m0 = ell;
        wb.ell = ell;
        return wb;
    }
    // m0 = 2(2n+1)(2k+1)((k+1)^n + 1) + 4n
    BigUint m0 = BigUint::pow(k + 1, n);
    m0 += BigUint(1);
    m0 *= 2 * n + 1;
    m0 *= 2 * k + 1;
    m0 *= 2;
    m0 += BigUint(4 * n);
    wb.m0 = m0;
    // ell = 2 * (2n * (m0 - 1) - 1)
    BigUint ell = m0;
    if (n == 0) {
        wb.ell = BigUint(0);
        return wb;
    }
    ell -= 1;
    ell *= 2 * n;
    ell -= 1;
    ell *= 2;
    wb.ell = ell;
    return wb;
}

WidthBound width_bound(const C2rpq& gamma, const WidthClass& cls) {
    return width_bound(gamma.atom_count(), cls);
}

// ---- Pre-pass: split multi-final atoms ---------------------------------

std::vector<C2rpq> split_multifinal(const C2rpq& q, SublangCache& cache) {
    std::vector<C2rpq> out{q};
    for (size_t j = 0; j < q.atoms.size(); ++j) {
        const NfaPtr& lang = q.atoms[j].lang;
        if (lang->final().size() <= 1 && lang->initial().size() <= 1) continue;
        std::vector<C2rpq> next;
        for (const C2rpq& d : out)
            for (Nfa::State qi : lang->initial())
                for (Nfa::State qf : lang->final()) {
                    C2rpq d2 = d;
                    d2.atoms[j].lang = cache.get(lang, qi, qf);
                    next.push_back(std::move(d2));
                }
        out = std::move(next);
    }
    return out;
}

// ---- MUAHomBounded -----------------------------------------------------

MuaResult mua_hom_bounded(const Uc2rpq& gamma, const WidthClass& cls, const MuaOptions& opt,
                          SublangCache& cache) {
    gamma.validate();
    if (opt.m < 1) throw std::invalid_argument("mua_hom_bounded: m must be >= 1");

    MuaResult res;
    res.approximation.name = gamma.name + "_approx";
    LanguageClasser classer;
    std::map<std::string, std::vector<size_t>> buckets; // iso signature -> kept ids

    auto consider = [&](C2rpq img, MuaCertificate cert) {
        img.sync_vars();
        std::string sig = iso_signature(img, classer);
        auto& bucket = buckets[sig];
        for (size_t id : bucket)
            if (is_isomorphic(res.approximation.disjuncts[id], img)) return;
        img.name = gamma.name + "_a" + std::to_string(res.approximation.disjuncts.size());
        bucket.push_back(res.approximation.disjuncts.size());
        res.approximation.disjuncts.push_back(std::move(img));
        res.certificates.push_back(std::move(cert));
    };

    for (size_t di = 0; di < gamma.disjuncts.size(); ++di) {
        CollapseResult col = collapse_equalities(gamma.disjuncts[di]);
        for (const C2rpq& piece : split_multifinal(col.query, cache)) {
            RefinementEnumerator refs(piece, opt.m, cache);
            while (auto ref = refs.next()) {
                ++res.refinements_seen;
                if (res.generated >= opt.max_generated) {
                    res.exhaustive = false;
                    break;
                }
                ImageEnumerator images(ref->result);
                while (auto img = images.next()) {
                    if (++res.generated > opt.max_generated) {
                        res.exhaustive = false;
                        break;
                    }
                    if (img->merged_parallel) res.merged_parallel_atoms = true;
                    bool ok;
                    try {
                        ok = cls.admits(img->image);
                    } catch (const WidthCapExceeded&) {
                        res.exhaustive = false;
                        continue;
                    }
                    if (!ok) continue;
                    consider(img->image, MuaCertificate{di, *ref, img->quotient});
                }
                if (!res.exhaustive && res.generated >= opt.max_generated) break;
            }
            if (!res.exhaustive && res.generated >= opt.max_generated) break;
        }
    }

    if (res.approximation.disjuncts.empty()) {
        // Keep the union well-formed: an unsatisfiable disjunct of the right
        // arity (an atom with the empty language would do, but an explicit
        // marker is clearer for reports).
        C2rpq empty;
        empty.name = gamma.name + "_empty";
        const C2rpq& d0 = gamma.disjuncts.front();
        for (size_t i = 0; i < d0.output.size(); ++i) {
            Var v = "o" + std::to_string(i);
            empty.output.push_back(v);
            empty.vars.insert(v);
        }
        // x -[empty language]-> x makes it unsatisfiable.
        auto none = std::make_shared<Nfa>(1, std::vector<Nfa::Transition>{}, std::set<int>{0},
                                          std::set<int>{});
        Var v0 = empty.output.empty() ? Var("x") : empty.output.front();
        empty.vars.insert(v0);
        empty.atoms.push_back({v0, none, v0});
        res.approximation.disjuncts.push_back(std::move(empty));
        res.certificates.push_back({});
    }
    return res;
}

// ---- minimize_union ----------------------------------------------------

Uc2rpq minimize_union(const Uc2rpq& u) {
    // Canonical order: by atom count, then variable count, then name.
    std::vector<size_t> order(u.disjuncts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const C2rpq &qa = u.disjuncts[a], &qb = u.disjuncts[b];
        if (qa.atoms.size() != qb.atoms.size()) return qa.atoms.size() < qb.atoms.size();
        if (qa.vars.size() != qb.vars.size()) return qa.vars.size() < qb.vars.size();
        return a < b;
    });

    size_t n = u.disjuncts.size();
    // absorbed[i]: some kept j != i has a homomorphism j -> i (so i <= j).
    std::vector<char> drop(n, 0);
    for (size_t oi = 0; oi < n; ++oi) {
        size_t i = order[oi];
        if (drop[i]) continue;
        for (size_t oj = 0; oj < n; ++oj) {
            size_t j = order[oj];
            if (i == j || drop[j]) continue;
            // Drop j when i absorbs it: hom i -> j means j contained in i.
            if (homomorphism_exists(u.disjuncts[i], u.disjuncts[j])) drop[j] = 1;
        }
    }
    Uc2rpq out;
    out.name = u.name;
    for (size_t oi = 0; oi < n; ++oi) {
        size_t i = order[oi];
        if (!drop[i]) out.disjuncts.push_back(u.disjuncts[i]);
    }
    if (out.disjuncts.empty()) out.disjuncts.push_back(u.disjuncts.front());
    return out;
}

} // namespace crpq
