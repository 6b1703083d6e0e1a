#include "sega/ranking.hpp"

#include "sega/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace sega {

namespace {

std::vector<double> skew_key(std::span<const double> skew, SkewConvention c) {
    std::vector<double> out(skew.begin(), skew.end());
    if (c == SkewConvention::AbsoluteAscending)
        for (auto& v : out) v = std::abs(v);
    return out;
}

}  // namespace

RobustStats robust_stats(std::span<const double> values) {
    if (values.empty()) throw DomainError("robust_stats of an empty vector");
    const auto n = values.size();
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    RobustStats s;
    s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    if (n == 1) return s;

    const double nn = static_cast<double>(n);
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / nn;
    double m2 = 0.0, m3 = 0.0;
    for (const double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    s.variance = m2 / (nn - 1.0);
    if (n < 3) return s;
    m2 /= nn;
    m3 /= nn;
    if (m2 <= 0.0) return s;
    const double g1 = m3 / std::pow(m2, 1.5);
    s.skewness = g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0);
    return s;
}

std::vector<double> rank_values(std::span<const double> values, RankDirection direction) {
    const auto n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](std::size_t a, std::size_t b) {
        return direction == RankDirection::LowerBetter ? values[a] < values[b] : values[a] > values[b];
    };
    std::stable_sort(order.begin(), order.end(), better);

    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        // positions i..j-1 (0-based) share the average of ranks i+1..j
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
        i = j;
    }
    return ranks;
}

double p_metric(double rank_median, double rank_variance, double rank_skewness) {
    return 0.6 * rank_median + 0.25 * rank_variance + 0.15 * rank_skewness;
}

double p_jacobian(double rank_median, double rank_variance, double rank_skewness, double rank_invalid) {
    return 0.3 * rank_median + 0.25 * rank_variance + 0.15 * rank_skewness + 0.3 * rank_invalid;
}

double final_score(double r_dsc, double r_hd, double r_var, double r_inter) {
    return (r_dsc + r_hd) / 6.0 + (r_var + r_inter) / 3.0;
}

std::vector<TeamStanding> intermediate_ranking(const std::vector<TeamRecord>& records,
                                               const RankingConventions& conventions) {
    std::vector<TeamStanding> out;
    out.reserve(records.size());
    std::vector<std::size_t> ranked;
    for (std::size_t t = 0; t < records.size(); ++t) {
        const auto& r = records[t];
        TeamStanding s;
        s.team_id = r.team_id;
        s.mean_runtime_s = r.mean_runtime_s;
        s.nr = r.nr_flag || r.dsc_values.empty() || r.hd_values.empty();
        if (!s.nr) {
            s.p_var = r.p_var;
            s.p_inter = r.p_inter;
            ranked.push_back(t);
        }
        out.push_back(std::move(s));
    }
    if (ranked.empty()) return out;

    const auto k = ranked.size();
    std::vector<double> dm(k), dv(k), ds(k), hm(k), hv(k), hs(k), pv(k), pi(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& r = records[ranked[i]];
        const auto d = robust_stats(r.dsc_values);
        const auto h = robust_stats(r.hd_values);
        dm[i] = d.median;
        dv[i] = d.variance;
        ds[i] = d.skewness;
        hm[i] = h.median;
        hv[i] = h.variance;
        hs[i] = h.skewness;
        pv[i] = r.p_var;
        pi[i] = std::abs(r.p_inter);
    }
    const auto r_dm = rank_values(dm, RankDirection::HigherBetter);
    const auto r_dv = rank_values(dv, RankDirection::LowerBetter);
    const auto r_ds = rank_values(skew_key(ds, conventions.dsc_skew), RankDirection::LowerBetter);
    const auto r_hm = rank_values(hm, RankDirection::LowerBetter);
    const auto r_hv = rank_values(hv, RankDirection::LowerBetter);
    const auto r_hs = rank_values(skew_key(hs, conventions.hd_skew), RankDirection::LowerBetter);

    std::vector<double> p_dsc(k), p_hd(k);
    for (std::size_t i = 0; i < k; ++i) {
        p_dsc[i] = p_metric(r_dm[i], r_dv[i], r_ds[i]);
        p_hd[i] = p_metric(r_hm[i], r_hv[i], r_hs[i]);
    }
    const auto r_dsc = rank_values(p_dsc, RankDirection::LowerBetter);
    const auto r_hd = rank_values(p_hd, RankDirection::LowerBetter);
    const auto r_var = rank_values(pv, RankDirection::HigherBetter);
    const auto r_inter = rank_values(pi, RankDirection::LowerBetter);

    for (std::size_t i = 0; i < k; ++i) {
        auto& s = out[ranked[i]];
        s.p_dsc = p_dsc[i];
        s.p_hd = p_hd[i];
        s.r_dsc = r_dsc[i];
        s.r_hd = r_hd[i];
        s.r_var = r_var[i];
        s.r_inter = r_inter[i];
    }
    return out;
}

Leaderboard final_ranking(std::vector<TeamStanding> standings) {
    for (auto& s : standings) {
        if (s.nr) {
            s.p_fin.reset();
            continue;
        }
        if (!s.r_dsc || !s.r_hd || !s.r_var || !s.r_inter)
            throw IncompleteRecord(fmt::format("team '{}' is missing an intermediate rank", s.team_id));
        s.p_fin = final_score(*s.r_dsc, *s.r_hd, *s.r_var, *s.r_inter);
    }
    std::stable_sort(standings.begin(), standings.end(), [](const TeamStanding& a, const TeamStanding& b) {
        if (a.nr != b.nr) return !a.nr;
        if (!a.nr && *a.p_fin != *b.p_fin) return *a.p_fin < *b.p_fin;
        if (!a.nr && a.mean_runtime_s != b.mean_runtime_s) return a.mean_runtime_s < b.mean_runtime_s;
        return a.team_id < b.team_id;
    });
    for (std::size_t i = 0; i < standings.size(); ++i) standings[i].position = i + 1;
    return Leaderboard{std::move(standings)};
}

Leaderboard build_leaderboard(const std::vector<TeamRecord>& records, const RankingConventions& conventions) {
    if (records.empty()) throw EmptyField("no teams to rank");
    return final_ranking(intermediate_ranking(records, conventions));
}

std::vector<MeshStanding> jacobian_ranking(const std::vector<MeshTeamRecord>& records) {
    if (records.empty()) throw EmptyField("no teams to rank");
    std::vector<MeshStanding> out;
    std::vector<std::size_t> ranked;
    for (std::size_t t = 0; t < records.size(); ++t) {
        out.push_back({records[t].team_id, records[t].nr_flag, {}, {}, {}, {}, {}, 0});
        if (!records[t].nr_flag) ranked.push_back(t);
    }
    const auto k = ranked.size();
    std::vector<double> med(k), var(k), skew(k), inv(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& r = records[ranked[i]];
        med[i] = r.stats.median;
        var[i] = r.stats.variance;
        skew[i] = std::abs(r.stats.skewness);
        inv[i] = r.mean_invalid;
    }
    const auto rm = rank_values(med, RankDirection::HigherBetter);
    const auto rv = rank_values(var, RankDirection::LowerBetter);
    const auto rs = rank_values(skew, RankDirection::LowerBetter);
    const auto rn = rank_values(inv, RankDirection::LowerBetter);
    for (std::size_t i = 0; i < k; ++i) {
        auto& s = out[ranked[i]];
        s.r_median = rm[i];
        s.r_variance = rv[i];
        s.r_skewness = rs[i];
        s.r_invalid = rn[i];
        s.p_j = p_jacobian(rm[i], rv[i], rs[i], rn[i]);
    }
    std::stable_sort(out.begin(), out.end(), [](const MeshStanding& a, const MeshStanding& b) {
        if (a.nr != b.nr) return !a.nr;
        if (!a.nr && *a.p_j != *b.p_j) return *a.p_j < *b.p_j;
        return a.team_id < b.team_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].position = i + 1;
    return out;
}

}  // namespace sega
