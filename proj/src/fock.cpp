#include "telesim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace telesim {

namespace {

double factorial(int n) {
    static const double table[] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320};
    return table[n];
}

}  // namespace

std::string ModeLabel::str() const {
    return spatial + ":" + std::to_string(bin) +
           (internal == Internal::matched ? "" : ":orth");
}

ModeLabel matched(std::string spatial, int bin) {
    return ModeLabel{std::move(spatial), bin, Internal::matched};
}

ModeLabel orthogonal(std::string spatial, int bin) {
    return ModeLabel{std::move(spatial), bin, Internal::orthogonal};
}

ModeRegistry::ModeRegistry(std::vector<ModeLabel> modes, int per_mode_cutoff,
                           int total_cutoff)
    : modes_(std::move(modes)),
      per_mode_cutoff_(per_mode_cutoff),
      total_cutoff_(total_cutoff) {
    if (per_mode_cutoff_ < 1 || total_cutoff_ < per_mode_cutoff_)
        throw std::invalid_argument("ModeRegistry: bad cutoffs");
    for (int i = 0; i < static_cast<int>(modes_.size()); ++i) {
        if (!index_.emplace(modes_[i], i).second)
            throw std::invalid_argument("ModeRegistry: duplicate mode label " +
                                        modes_[i].str());
    }
}

int ModeRegistry::index_of(const ModeLabel& m) const {
    auto it = index_.find(m);
    if (it == index_.end())
        throw std::invalid_argument("unknown mode label " + m.str());
    return it->second;
}

bool ModeRegistry::contains(const ModeLabel& m) const {
    return index_.count(m) > 0;
}

std::vector<int> ModeRegistry::spatial_indices(const std::string& spatial) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (modes_[i].spatial == spatial) out.push_back(i);
    return out;
}

std::shared_ptr<const ModeRegistry> ModeRegistry::extended(
    const std::vector<ModeLabel>& extra) const {
    std::vector<ModeLabel> all = modes_;
    all.insert(all.end(), extra.begin(), extra.end());
    return std::make_shared<const ModeRegistry>(all, per_mode_cutoff_,
                                                total_cutoff_);
}

FockState::FockState(RegistryPtr registry) : registry_(std::move(registry)) {
    amps_.emplace(Occupation(registry_->size(), 0), Complex(1.0, 0.0));
    normalized_ = true;
}

FockState::FockState(RegistryPtr registry, AmplitudeMap amplitudes,
                     bool normalized, double truncated_weight)
    : registry_(std::move(registry)),
      amps_(std::move(amplitudes)),
      normalized_(normalized),
      truncated_weight_(truncated_weight) {
    for (auto it = amps_.begin(); it != amps_.end();) {
        if (static_cast<int>(it->first.size()) != registry_->size())
            throw std::invalid_argument("FockState: occupation length mismatch");
        if (std::abs(it->second) < kPruneThreshold)
            it = amps_.erase(it);
        else
            ++it;
    }
}

Complex FockState::amplitude(const Occupation& occ) const {
    auto it = amps_.find(occ);
    return it == amps_.end() ? Complex(0.0, 0.0) : it->second;
}

double FockState::norm2() const {
    double s = 0.0;
    for (const auto& [occ, amp] : amps_) s += std::norm(amp);
    return s;
}

namespace {

// Distributes n photons of one input column over the output modes,
// accumulating the creation-operator monomial m and its coefficient.
void distribute(const Eigen::VectorXcd& column, int n, int k, Complex coeff,
                std::vector<int>& monomial,
                const std::function<void(const std::vector<int>&, Complex)>& emit) {
    if (k == static_cast<int>(column.size()) - 1) {
        if (std::abs(column[k]) == 0.0 && n > 0) return;
        monomial[k] += n;
        Complex c = coeff * std::pow(column[k], n) / factorial(n);
        emit(monomial, c);
        monomial[k] -= n;
        return;
    }
    for (int take = 0; take <= n; ++take) {
        if (take > 0 && std::abs(column[k]) == 0.0) break;
        monomial[k] += take;
        distribute(column, n - take, k + 1, coeff * std::pow(column[k], take) /
                                                 factorial(take),
                   monomial, emit);
        monomial[k] -= take;
    }
}

}  // namespace

FockState apply_mode_isometry(const FockState& state,
                              const std::vector<int>& in_modes,
                              const std::vector<int>& out_modes,
                              const Eigen::MatrixXcd& map) {
    const auto& reg = state.registry();
    if (map.rows() != static_cast<long>(out_modes.size()) ||
        map.cols() != static_cast<long>(in_modes.size()))
        throw std::invalid_argument("apply_mode_isometry: shape mismatch");

    const double in_norm2 = state.norm2();
    AmplitudeMap out;

    for (const auto& [occ, amp] : state.amplitudes()) {
        // occupations of the input modes, then zero them out
        std::vector<int> n_in(in_modes.size());
        Occupation base = occ;
        for (std::size_t j = 0; j < in_modes.size(); ++j) {
            n_in[j] = base[in_modes[j]];
            base[in_modes[j]] = 0;
        }

        double prefactor = 1.0;
        for (int n : n_in) prefactor /= std::sqrt(factorial(n));

        // expand prod_j (sum_k U(k,j) b_k†)^{n_j} one input mode at a time
        struct Term {
            std::vector<int> monomial;
            Complex coeff;
        };
        std::vector<Term> terms{{std::vector<int>(out_modes.size(), 0), amp * prefactor}};
        for (std::size_t j = 0; j < in_modes.size(); ++j) {
            if (n_in[j] == 0) continue;
            std::vector<Term> next;
            Eigen::VectorXcd col = map.col(j);
            for (const auto& t : terms) {
                std::vector<int> mono = t.monomial;
                // n_j! times multinomial/factorials = n_j! * prod 1/take!
                Complex scale = t.coeff * factorial(n_in[j]);
                distribute(col, n_in[j], 0, scale, mono,
                           [&](const std::vector<int>& m, Complex c) {
                               next.push_back({m, c});
                           });
            }
            terms = std::move(next);
        }

        for (const auto& t : terms) {
            Occupation result = base;
            bool keep = true;
            double boson = 1.0;
            int total = 0;
            for (std::size_t k = 0; k < out_modes.size(); ++k) {
                int prior = result[out_modes[k]];
                int now = prior + t.monomial[k];
                if (now > reg.per_mode_cutoff()) {
                    keep = false;
                    break;
                }
                boson *= std::sqrt(factorial(now) / factorial(prior));
                result[out_modes[k]] = static_cast<std::uint8_t>(now);
            }
            if (!keep) continue;
            for (auto n : result) total += n;
            if (total > reg.total_cutoff()) continue;
            out[result] += t.coeff * boson;
        }
    }

    FockState next(state.registry_ptr(), std::move(out), false,
                   state.truncated_weight());
    double lost = in_norm2 - next.norm2();
    FockState final(state.registry_ptr(), next.amplitudes(),
                    state.is_normalized() && lost < 1e-12,
                    state.truncated_weight() + std::max(0.0, lost));
    return final;
}

FockState apply_beamsplitter(const FockState& state, const ModeLabel& mode_a,
                             const ModeLabel& mode_b, double transmissivity,
                             double phase) {
    if (mode_a == mode_b)
        throw std::invalid_argument("apply_beamsplitter: identical modes");
    if (transmissivity < 0.0 || transmissivity > 1.0)
        throw std::invalid_argument("apply_beamsplitter: transmissivity outside [0,1]");
    int ia = state.registry().index_of(mode_a);
    int ib = state.registry().index_of(mode_b);
    double t = std::sqrt(transmissivity);
    double r = std::sqrt(1.0 - transmissivity);
    Complex i_unit(0.0, 1.0);
    Eigen::MatrixXcd u(2, 2);
    u << t, i_unit * r * std::exp(Complex(0.0, phase)),
        i_unit * r * std::exp(Complex(0.0, -phase)), t;
    return apply_mode_isometry(state, {ia, ib}, {ia, ib}, u);
}

FockState apply_phase(const FockState& state, const ModeLabel& mode,
                      double phase) {
    int idx = state.registry().index_of(mode);
    AmplitudeMap out;
    for (const auto& [occ, amp] : state.amplitudes())
        out[occ] = amp * std::exp(Complex(0.0, phase * occ[idx]));
    return FockState(state.registry_ptr(), std::move(out),
                     state.is_normalized(), state.truncated_weight());
}

FockState apply_loss(const FockState& state, const ModeLabel& mode,
                     double survival) {
    if (survival < 0.0 || survival > 1.0)
        throw std::invalid_argument("apply_loss: survival outside [0,1]");
    int idx = state.registry().index_of(mode);
    // fresh environment mode, bin index keeps labels unique
    int env_count = 0;
    for (int i = 0; i < state.registry().size(); ++i)
        if (state.registry().label(i).spatial == "env") ++env_count;
    ModeLabel env = matched("env", env_count + 1);
    auto reg = state.registry().extended({env});

    AmplitudeMap grown;
    for (const auto& [occ, amp] : state.amplitudes()) {
        Occupation o = occ;
        o.push_back(0);
        grown.emplace(std::move(o), amp);
    }
    FockState wide(reg, std::move(grown), state.is_normalized(),
                   state.truncated_weight());

    double t = std::sqrt(survival);
    double r = std::sqrt(1.0 - survival);
    Eigen::MatrixXcd u(2, 1);
    u << t, Complex(0.0, 1.0) * r;
    return apply_mode_isometry(wide, {idx}, {idx, reg->index_of(env)}, u);
}

std::map<Occupation, double> measure_number_distribution(
    const FockState& state, const std::vector<ModeLabel>& keep) {
    if (std::abs(state.norm2() - 1.0) > 1e-9)
        throw std::invalid_argument("measure_number_distribution: unnormalized state");
    std::vector<int> idx;
    idx.reserve(keep.size());
    for (const auto& m : keep) idx.push_back(state.registry().index_of(m));

    std::map<Occupation, double> dist;
    for (const auto& [occ, amp] : state.amplitudes()) {
        Occupation key(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) key[k] = occ[idx[k]];
        dist[key] += std::norm(amp);
    }
    return dist;
}

FockState tensor(const FockState& a, const FockState& b) {
    for (int i = 0; i < b.registry().size(); ++i)
        if (a.registry().contains(b.registry().label(i)))
            throw std::invalid_argument("tensor: overlapping registries");
    std::vector<ModeLabel> extra;
    for (int i = 0; i < b.registry().size(); ++i)
        extra.push_back(b.registry().label(i));
    auto reg = a.registry().extended(extra);

    AmplitudeMap out;
    for (const auto& [oa, va] : a.amplitudes())
        for (const auto& [ob, vb] : b.amplitudes()) {
            Occupation o = oa;
            o.insert(o.end(), ob.begin(), ob.end());
            out.emplace(std::move(o), va * vb);
        }
    return FockState(reg, std::move(out), a.is_normalized() && b.is_normalized(),
                     a.truncated_weight() + b.truncated_weight());
}

FockState product(const FockState& a, const FockState& b) {
    if (a.registry_ptr().get() != b.registry_ptr().get())
        throw std::invalid_argument("product: different registries");
    const auto& reg = a.registry();
    AmplitudeMap out;
    double dropped = 0.0;
    for (const auto& [oa, va] : a.amplitudes())
        for (const auto& [ob, vb] : b.amplitudes()) {
            Occupation o(oa.size());
            int total = 0;
            bool ok = true;
            for (std::size_t k = 0; k < o.size(); ++k) {
                if (oa[k] > 0 && ob[k] > 0)
                    throw std::invalid_argument("product: overlapping occupations");
                int n = oa[k] + ob[k];
                if (n > reg.per_mode_cutoff()) ok = false;
                total += n;
                o[k] = static_cast<std::uint8_t>(n);
            }
            if (!ok || total > reg.total_cutoff()) {
                dropped += std::norm(va * vb);
                continue;
            }
            out[o] += va * vb;
        }
    return FockState(a.registry_ptr(), std::move(out), false,
                     a.truncated_weight() + b.truncated_weight() + dropped);
}

std::pair<FockState, double> normalize(const FockState& state) {
    double norm = std::sqrt(state.norm2());
    if (norm < 1e-300) throw std::invalid_argument("normalize: zero state");
    AmplitudeMap out;
    for (const auto& [occ, amp] : state.amplitudes()) out[occ] = amp / norm;
    return {FockState(state.registry_ptr(), std::move(out), true,
                      state.truncated_weight()),
            norm};
}

std::pair<FockState, double> postselect(
    const FockState& state,
    const std::function<bool(const ModeRegistry&, const Occupation&)>& pred) {
    AmplitudeMap out;
    double weight = 0.0;
    for (const auto& [occ, amp] : state.amplitudes()) {
        if (pred(state.registry(), occ)) {
            weight += std::norm(amp);
            out.emplace(occ, amp);
        }
    }
    FockState kept(state.registry_ptr(), std::move(out), false,
                   state.truncated_weight());
    return {normalize(kept).first, weight};
}

FockState apply_creation(const FockState& state, const ModeLabel& mode,
                         Complex coeff) {
    int idx = state.registry().index_of(mode);
    const auto& reg = state.registry();
    AmplitudeMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        int n = occ[idx];
        if (n + 1 > reg.per_mode_cutoff()) continue;
        int total = 0;
        for (auto v : occ) total += v;
        if (total + 1 > reg.total_cutoff()) continue;
        Occupation o = occ;
        o[idx] = static_cast<std::uint8_t>(n + 1);
        out[o] += amp * coeff * std::sqrt(n + 1.0);
    }
    return FockState(state.registry_ptr(), std::move(out), false,
                     state.truncated_weight());
}

}  // namespace telesim
