#include "inplay/panel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "inplay/csv.hpp"

namespace inplay {

std::string_view to_string(Side side) { return side == Side::home ? "home" : "away"; }

Side parse_side(std::string_view text) {
    if (text == "home" || text == "h") return Side::home;
    if (text == "away" || text == "a") return Side::away;
    throw DataError("unknown team side '" + std::string(text) + "'");
}

std::size_t Panel::observation_count() const {
    std::size_t n = 0;
    for (const auto& m : matches) n += m.rows.size();
    return n;
}

const MatchPanel* Panel::find(std::string_view match_id) const {
    auto it = std::lower_bound(matches.begin(), matches.end(), match_id,
                               [](const MatchPanel& m, std::string_view id) { return m.match_id < id; });
    if (it == matches.end() || it->match_id != match_id) return nullptr;
    return &*it;
}

std::vector<MinuteTotals> aggregate_ticks(std::span<const TickRecord> ticks, int last_minute) {
    std::vector<MinuteTotals> minutes(static_cast<std::size_t>(std::max(last_minute, 0)));
    for (int t = 1; t <= last_minute; ++t) minutes[t - 1].minute = t;

    long prev_sec = -1;
    for (const auto& tick : ticks) {
        if (tick.t_sec < 0) throw DataError(tick.match_id + ": negative t_sec");
        if (tick.t_sec < prev_sec) {
            throw DataError(tick.match_id + ": ticks not sorted by t_sec at t_sec=" +
                            std::to_string(tick.t_sec));
        }
        prev_sec = tick.t_sec;
        if (tick.stake_home < 0 || tick.stake_draw < 0 || tick.stake_away < 0) {
            throw DataError(tick.match_id + ": negative stake at t_sec=" + std::to_string(tick.t_sec));
        }
        const long minute = tick.t_sec / 60 + 1;
        if (minute > last_minute) continue;
        auto& m = minutes[static_cast<std::size_t>(minute - 1)];
        m.has_ticks = true;
        m.stake_home += tick.stake_home;
        m.stake_draw += tick.stake_draw;
        m.stake_away += tick.stake_away;
        if (tick.market_open) {
            const auto& o = tick.odds;
            if (!(o.home > 1.0 && o.draw > 1.0 && o.away > 1.0)) {
                throw DataError(tick.match_id + ": open-market odds must exceed 1 at t_sec=" +
                                std::to_string(tick.t_sec));
            }
            m.market_open = true;
            m.odds = o;  // last open tick wins
        }
    }

    std::optional<OddsTriple> carry;
    for (auto& m : minutes) {
        if (m.odds) {
            carry = m.odds;
        } else {
            m.odds = carry;
        }
    }
    return minutes;
}

std::vector<MinuteObservation> aggregate_minutes(std::span<const TickRecord> ticks,
                                                 const MatchMeta& meta) {
    if (meta.scoreless()) {
        throw DataError("match " + meta.match_id + " is scoreless; nothing to aggregate");
    }
    const int goal = *meta.first_goal_minute;
    if (goal < 1) throw DataError("match " + meta.match_id + ": first goal minute must be >= 1");
    const Side scorer = *meta.first_scorer;

    const auto minutes = aggregate_ticks(ticks, goal - 1);
    const auto pre = implied_probs(meta.prematch);
    const double improbpre = orient_to_scorer(meta, pre.home, pre.away).first;

    std::vector<MinuteObservation> out;
    out.reserve(minutes.size());
    for (const auto& m : minutes) {
        MinuteObservation obs;
        obs.match_id = meta.match_id;
        obs.t = m.minute;
        obs.mintogoal = goal - m.minute;
        obs.improbpre = improbpre;
        obs.home = scorer == Side::home ? 1 : 0;
        if (m.odds) {
            const auto p = implied_probs(*m.odds);
            std::tie(obs.improb, obs.improb_opp) = orient_to_scorer(meta, p.home, p.away);
        }
        std::tie(obs.stake_team, obs.stake_opp) = orient_to_scorer(meta, m.stake_home, m.stake_away);
        obs.stake_draw = m.stake_draw;
        const double both = obs.stake_team + obs.stake_opp;
        if (both > 0.0) obs.stakerel = obs.stake_team / both;
        obs.market_open = m.market_open;
        obs.halftime = meta.half_time && meta.half_time->contains(m.minute);

        for (const auto& rc : meta.red_cards) {
            if (rc.minute <= m.minute) {
                (rc.side == scorer ? obs.redcardteam : obs.redcardopp) = 1;
            }
        }
        double xg = 0.0;
        for (const auto& ev : meta.xg_events) {
            if (ev.minute <= m.minute) xg += ev.side == scorer ? ev.xg : -ev.xg;
        }
        obs.xgdiff = xg;
        out.push_back(std::move(obs));
    }
    return out;
}

FilteredPanel apply_sample_filters(std::span<const MatchData> matches, int min_goal_minute) {
    FilteredPanel result;
    result.counts.input_matches = matches.size();
    for (const auto& match : matches) {
        const auto& meta = match.meta;
        if (meta.scoreless()) {
            ++result.counts.scoreless;
            continue;
        }
        if (*meta.first_goal_minute < min_goal_minute) {
            ++result.counts.early_goal;
            continue;
        }
        MatchPanel mp;
        mp.match_id = meta.match_id;
        std::tie(mp.team, mp.opponent) = orient_to_scorer(meta, meta.home_team, meta.away_team);
        mp.first_goal_minute = *meta.first_goal_minute;
        mp.rows = aggregate_minutes(match.ticks, meta);
        result.counts.observations += mp.rows.size();
        result.panel.matches.push_back(std::move(mp));
    }
    result.counts.retained = result.panel.matches.size();
    std::sort(result.panel.matches.begin(), result.panel.matches.end(),
              [](const MatchPanel& a, const MatchPanel& b) { return a.match_id < b.match_id; });
    return result;
}

VolumeTable season_volumes(std::span<const MatchData> matches) {
    std::map<std::string, std::pair<double, long>> acc;  // team -> (stake sum, minutes)
    for (const auto& match : matches) {
        const auto& meta = match.meta;
        int last_minute = 0;
        if (meta.first_goal_minute) {
            last_minute = *meta.first_goal_minute - 1;
        } else if (!match.ticks.empty()) {
            last_minute = static_cast<int>(match.ticks.back().t_sec / 60 + 1);
        }
        for (const auto& m : aggregate_ticks(match.ticks, last_minute)) {
            if (!m.has_ticks) continue;
            auto& h = acc[meta.home_team];
            h.first += m.stake_home;
            h.second += 1;
            auto& a = acc[meta.away_team];
            a.first += m.stake_away;
            a.second += 1;
        }
    }
    VolumeTable out;
    for (const auto& [team, sum_n] : acc) {
        out[team] = sum_n.second > 0 ? sum_n.first / static_cast<double>(sum_n.second) : 0.0;
    }
    return out;
}

Panel compute_volumediff(Panel panel, const VolumeTable& volumes) {
    auto lookup = [&](const std::string& team) {
        auto it = volumes.find(team);
        if (it == volumes.end()) throw DataError("volume table has no entry for team '" + team + "'");
        return it->second;
    };
    for (auto& m : panel.matches) {
        const double diff = lookup(m.team) - lookup(m.opponent);
        for (auto& row : m.rows) row.volumediff = diff;
    }
    return panel;
}

PreparedPanel prepare_panel(std::span<const MatchData> matches, int min_goal_minute) {
    PreparedPanel out;
    auto filtered = apply_sample_filters(matches, min_goal_minute);
    out.volumes = season_volumes(matches);
    out.panel = compute_volumediff(std::move(filtered.panel), out.volumes);
    out.counts = filtered.counts;
    return out;
}

Panel exclude_closed_market(Panel panel) {
    for (auto& m : panel.matches) {
        std::vector<MinuteObservation> kept;
        kept.reserve(m.rows.size());
        for (auto& row : m.rows) {
            if (row.market_open) {
                kept.push_back(std::move(row));
            } else {
                m.dropped_minutes.push_back(row.t);
            }
        }
        m.rows = std::move(kept);
    }
    return panel;
}

// ---------------------------------------------------------------- CSV ----

namespace {

constexpr const char* kTickHeader =
    "match_id,t_sec,odds_home,odds_draw,odds_away,stake_home,stake_draw,stake_away,market_open";

constexpr const char* kMetaHeader =
    "match_id,home_team,away_team,odds_home_pre,odds_draw_pre,odds_away_pre,first_goal_minute,"
    "first_scorer_side,halftime_first,halftime_last,event_type,event_minute,event_side,event_xg";

constexpr const char* kPanelHeader =
    "match_id,t,mintogoal,improb,improbpre,redcardteam,redcardopp,xgdiff,home,volumediff,stakerel,"
    "market_open,halftime,improb_opp";

using csv::format_double;
using csv::format_optional;
using csv::quote_if_needed;

}  // namespace

std::vector<TickRecord> read_ticks_csv(const std::string& path) {
    const auto table = csv::Table::read_file(path);
    const auto c_id = table.column("match_id");
    const auto c_t = table.column("t_sec");
    const auto c_oh = table.column("odds_home");
    const auto c_od = table.column("odds_draw");
    const auto c_oa = table.column("odds_away");
    const auto c_sh = table.column("stake_home");
    const auto c_sd = table.column("stake_draw");
    const auto c_sa = table.column("stake_away");
    const auto c_open = table.column("market_open");
    std::vector<TickRecord> out;
    out.reserve(table.rows());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        TickRecord t;
        t.match_id = table.cell(r, c_id);
        t.t_sec = table.as_long(r, c_t);
        t.market_open = table.as_bool(r, c_open);
        const double nan = std::nan("");
        t.odds.home = table.as_optional_double(r, c_oh).value_or(nan);
        t.odds.draw = table.as_optional_double(r, c_od).value_or(nan);
        t.odds.away = table.as_optional_double(r, c_oa).value_or(nan);
        t.stake_home = table.as_double(r, c_sh);
        t.stake_draw = table.as_double(r, c_sd);
        t.stake_away = table.as_double(r, c_sa);
        out.push_back(std::move(t));
    }
    return out;
}

void write_ticks_csv(std::ostream& out, std::span<const TickRecord> ticks, bool header) {
    if (header) out << kTickHeader << '\n';
    auto odd = [](double o) { return std::isfinite(o) ? format_double(o) : std::string(); };
    for (const auto& t : ticks) {
        out << quote_if_needed(t.match_id) << ',' << t.t_sec << ',' << odd(t.odds.home) << ','
            << odd(t.odds.draw) << ',' << odd(t.odds.away) << ',' << format_double(t.stake_home) << ','
            << format_double(t.stake_draw) << ',' << format_double(t.stake_away) << ','
            << (t.market_open ? 1 : 0) << '\n';
    }
}

std::vector<MatchMeta> read_meta_csv(const std::string& path) {
    const auto table = csv::Table::read_file(path);
    const auto c_id = table.column("match_id");
    const auto c_home = table.column("home_team");
    const auto c_away = table.column("away_team");
    const auto c_oh = table.column("odds_home_pre");
    const auto c_od = table.column("odds_draw_pre");
    const auto c_oa = table.column("odds_away_pre");
    const auto c_goal = table.column("first_goal_minute");
    const auto c_scorer = table.column("first_scorer_side");
    const auto c_ht0 = table.column("halftime_first");
    const auto c_ht1 = table.column("halftime_last");
    const auto c_type = table.column("event_type");
    const auto c_min = table.column("event_minute");
    const auto c_side = table.column("event_side");
    const auto c_xg = table.column("event_xg");

    std::map<std::string, MatchMeta> by_id;
    std::set<std::string> seen_match_row;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const std::string& id = table.cell(r, c_id);
        auto& meta = by_id[id];
        meta.match_id = id;
        const std::string& type = table.cell(r, c_type);
        if (type == "match") {
            if (!seen_match_row.insert(id).second) {
                throw DataError(path + ": duplicate match row for " + id);
            }
            meta.home_team = table.cell(r, c_home);
            meta.away_team = table.cell(r, c_away);
            meta.prematch = {table.as_double(r, c_oh), table.as_double(r, c_od), table.as_double(r, c_oa)};
            if (auto g = table.as_optional_long(r, c_goal)) {
                meta.first_goal_minute = static_cast<int>(*g);
                meta.first_scorer = parse_side(table.cell(r, c_scorer));
            }
            auto h0 = table.as_optional_long(r, c_ht0);
            auto h1 = table.as_optional_long(r, c_ht1);
            if (h0 && h1) meta.half_time = HalfTimeBreak{static_cast<int>(*h0), static_cast<int>(*h1)};
        } else if (type == "red_card") {
            const int minute = static_cast<int>(table.as_long(r, c_min));
            if (minute < 1) throw DataError(path + ": red card minute must be >= 1 in " + id);
            meta.red_cards.push_back({minute, parse_side(table.cell(r, c_side))});
        } else if (type == "xg") {
            const int minute = static_cast<int>(table.as_long(r, c_min));
            const double xg = table.as_double(r, c_xg);
            if (minute < 1 || xg < 0) throw DataError(path + ": invalid xG event in " + id);
            meta.xg_events.push_back({minute, parse_side(table.cell(r, c_side)), xg});
        } else {
            throw DataError(path + ": unknown event_type '" + type + "'");
        }
    }
    std::vector<MatchMeta> out;
    out.reserve(by_id.size());
    for (auto& [id, meta] : by_id) {
        if (!seen_match_row.count(id)) throw DataError(path + ": no match row for " + id);
        out.push_back(std::move(meta));
    }
    return out;
}

void write_meta_csv(std::ostream& out, std::span<const MatchMeta> metas) {
    out << kMetaHeader << '\n';
    for (const auto& m : metas) {
        auto prefix = [&] {
            std::string s = quote_if_needed(m.match_id) + ',' + quote_if_needed(m.home_team) + ',' +
                            quote_if_needed(m.away_team) + ',' + format_double(m.prematch.home) + ',' +
                            format_double(m.prematch.draw) + ',' + format_double(m.prematch.away) + ',';
            if (m.first_goal_minute) {
                s += std::to_string(*m.first_goal_minute) + ',' + std::string(to_string(*m.first_scorer));
            } else {
                s += ',';
            }
            s += ',';
            if (m.half_time) {
                s += std::to_string(m.half_time->first_minute) + ',' + std::to_string(m.half_time->last_minute);
            } else {
                s += ',';
            }
            return s;
        }();
        out << prefix << ",match,,,\n";
        for (const auto& rc : m.red_cards) {
            out << prefix << ",red_card," << rc.minute << ',' << to_string(rc.side) << ",\n";
        }
        for (const auto& ev : m.xg_events) {
            out << prefix << ",xg," << ev.minute << ',' << to_string(ev.side) << ',' << format_double(ev.xg)
                << '\n';
        }
    }
}

Panel read_panel_csv(const std::string& path) {
    const auto table = csv::Table::read_file(path);
    const auto c_id = table.column("match_id");
    const auto c_t = table.column("t");
    const auto c_mtg = table.column("mintogoal");
    const auto c_improb = table.column("improb");
    const auto c_pre = table.column("improbpre");
    const auto c_rct = table.column("redcardteam");
    const auto c_rco = table.column("redcardopp");
    const auto c_xg = table.column("xgdiff");
    const auto c_home = table.column("home");
    const auto c_vol = table.column("volumediff");
    const auto c_stake = table.column("stakerel");
    const auto c_open = table.column("market_open");
    const auto c_ht = table.column("halftime");
    const bool has_opp = table.has_column("improb_opp");
    const auto c_opp = has_opp ? table.column("improb_opp") : 0;

    std::map<std::string, MatchPanel> by_id;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        MinuteObservation o;
        o.match_id = table.cell(r, c_id);
        o.t = static_cast<int>(table.as_long(r, c_t));
        o.mintogoal = static_cast<int>(table.as_long(r, c_mtg));
        o.improb = table.as_optional_double(r, c_improb);
        if (has_opp) o.improb_opp = table.as_optional_double(r, c_opp);
        o.improbpre = table.as_double(r, c_pre);
        o.redcardteam = static_cast<int>(table.as_long(r, c_rct));
        o.redcardopp = static_cast<int>(table.as_long(r, c_rco));
        o.xgdiff = table.as_double(r, c_xg);
        o.home = static_cast<int>(table.as_long(r, c_home));
        o.volumediff = table.as_double(r, c_vol);
        o.stakerel = table.as_optional_double(r, c_stake);
        o.market_open = table.as_bool(r, c_open);
        o.halftime = table.as_bool(r, c_ht);
        if (o.t < 1 || o.mintogoal < 1) {
            throw DataError(path + ": row " + std::to_string(r + 1) + " violates t >= 1, mintogoal >= 1");
        }
        if (o.stakerel && (*o.stakerel < 0.0 || *o.stakerel > 1.0)) {
            throw DataError(path + ": stakerel outside [0,1] in row " + std::to_string(r + 1));
        }
        auto& mp = by_id[o.match_id];
        if (!mp.rows.empty() && mp.rows.back().t >= o.t) {
            throw DataError(path + ": minutes not strictly increasing in match " + o.match_id);
        }
        mp.match_id = o.match_id;
        mp.first_goal_minute = o.t + o.mintogoal;
        mp.rows.push_back(std::move(o));
    }
    Panel panel;
    for (auto& [id, mp] : by_id) panel.matches.push_back(std::move(mp));
    return panel;
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
    out << kPanelHeader << '\n';
    for (const auto& m : panel.matches) {
        for (const auto& o : m.rows) {
            out << quote_if_needed(o.match_id) << ',' << o.t << ',' << o.mintogoal << ','
                << format_optional(o.improb) << ',' << format_double(o.improbpre) << ',' << o.redcardteam
                << ',' << o.redcardopp << ',' << format_double(o.xgdiff) << ',' << o.home << ','
                << format_double(o.volumediff) << ',' << format_optional(o.stakerel) << ','
                << (o.market_open ? 1 : 0) << ',' << (o.halftime ? 1 : 0) << ','
                << format_optional(o.improb_opp) << '\n';
        }
    }
}

VolumeTable read_volumes_csv(const std::string& path) {
    const auto table = csv::Table::read_file(path);
    const auto c_team = table.column("team");
    const auto c_avg = table.column("avg_stake_per_minute");
    VolumeTable out;
    for (std::size_t r = 0; r < table.rows(); ++r) out[table.cell(r, c_team)] = table.as_double(r, c_avg);
    return out;
}

void write_volumes_csv(std::ostream& out, const VolumeTable& volumes) {
    out << "team,avg_stake_per_minute\n";
    for (const auto& [team, v] : volumes) out << quote_if_needed(team) << ',' << format_double(v) << '\n';
}

std::vector<MatchData> join_matches(std::vector<MatchMeta> metas, std::vector<TickRecord> ticks) {
    std::sort(metas.begin(), metas.end(),
              [](const MatchMeta& a, const MatchMeta& b) { return a.match_id < b.match_id; });
    std::vector<MatchData> out;
    out.reserve(metas.size());
    for (auto& m : metas) out.push_back(MatchData{std::move(m), {}});
    auto find = [&](const std::string& id) -> MatchData& {
        auto it = std::lower_bound(out.begin(), out.end(), id,
                                   [](const MatchData& d, const std::string& key) { return d.meta.match_id < key; });
        if (it == out.end() || it->meta.match_id != id) throw DataError("ticks reference unknown match " + id);
        return *it;
    };
    MatchData* current = nullptr;
    for (auto& t : ticks) {
        if (!current || current->meta.match_id != t.match_id) current = &find(t.match_id);
        current->ticks.push_back(std::move(t));
    }
    return out;
}

}  // namespace inplay
