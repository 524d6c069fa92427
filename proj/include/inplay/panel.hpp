#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "inplay/error.hpp"
#include "inplay/odds.hpp"

namespace inplay {

enum class Side { home, away };

std::string_view to_string(Side side);
Side parse_side(std::string_view text);
inline Side other(Side side) { return side == Side::home ? Side::away : Side::home; }

// One 1 Hz observation of posted odds and stakes placed during that second.
struct TickRecord {
    std::string match_id;
    long t_sec = 0;
    OddsTriple odds;
    double stake_home = 0.0;
    double stake_draw = 0.0;
    double stake_away = 0.0;
    bool market_open = true;
};

struct RedCardEvent {
    int minute = 0;
    Side side = Side::home;
};

struct XgEvent {
    int minute = 0;
    Side side = Side::home;
    double xg = 0.0;
};

// Wall-clock minutes covered by the half-time break (inclusive).
struct HalfTimeBreak {
    int first_minute = 0;
    int last_minute = 0;
    bool contains(int t) const { return t >= first_minute && t <= last_minute; }
};

struct MatchMeta {
    std::string match_id;
    std::string home_team;
    std::string away_team;
    OddsTriple prematch;
    std::optional<int> first_goal_minute;  // absent for scoreless matches
    std::optional<Side> first_scorer;
    std::vector<RedCardEvent> red_cards;
    std::vector<XgEvent> xg_events;
    std::optional<HalfTimeBreak> half_time;

    bool scoreless() const { return !first_goal_minute.has_value(); }
    const std::string& team_name(Side side) const {
        return side == Side::home ? home_team : away_team;
    }
};

struct MatchData {
    MatchMeta meta;
    std::vector<TickRecord> ticks;  // sorted by t_sec
};

// One scoreless minute seen from the side of the team that scores first.
struct MinuteObservation {
    std::string match_id;
    int t = 0;
    int mintogoal = 0;
    std::optional<double> improb;      // missing when no odds were ever posted
    std::optional<double> improb_opp;  // opponent's in-match implied probability
    double improbpre = 0.0;
    int redcardteam = 0;
    int redcardopp = 0;
    double xgdiff = 0.0;
    int home = 0;
    double volumediff = 0.0;
    std::optional<double> stakerel;  // missing when nothing was staked on either team
    bool market_open = true;
    bool halftime = false;
    double stake_team = 0.0;
    double stake_opp = 0.0;
    double stake_draw = 0.0;
};

struct MatchPanel {
    std::string match_id;
    std::string team;      // first scorer
    std::string opponent;
    int first_goal_minute = 0;
    std::vector<MinuteObservation> rows;  // strictly increasing t
    std::vector<int> dropped_minutes;     // minutes removed by exclude_closed_market
};

struct Panel {
    std::vector<MatchPanel> matches;  // sorted by match_id

    std::size_t observation_count() const;
    const MatchPanel* find(std::string_view match_id) const;
};

// Average stake per minute placed on each team over all 0:0 minutes.
using VolumeTable = std::map<std::string, double>;

// Per-minute totals on the home/away axis before orientation.
struct MinuteTotals {
    int minute = 0;
    std::optional<OddsTriple> odds;  // last open-market tick, carried forward
    double stake_home = 0.0;
    double stake_draw = 0.0;
    double stake_away = 0.0;
    bool has_ticks = false;
    bool market_open = false;
};

/// Aggregates ticks into minutes 1..last_minute; minute t collects
/// t_sec in [60(t-1), 60t). Ticks at or beyond 60*last_minute are ignored.
/// Validates tick invariants and throws DataError on violation.
std::vector<MinuteTotals> aggregate_ticks(std::span<const TickRecord> ticks, int last_minute);

/// Maps (home, away) labelled values onto (first scorer, opponent).
template <typename T>
std::pair<T, T> orient_to_scorer(const MatchMeta& meta, T home_value, T away_value) {
    if (!meta.first_scorer) {
        throw DataError("match " + meta.match_id + " is scoreless; cannot orient to first scorer");
    }
    if (*meta.first_scorer == Side::home) return {std::move(home_value), std::move(away_value)};
    return {std::move(away_value), std::move(home_value)};
}

/// Minute observations t = 1..T_i - 1 of a match with a first goal in minute
/// T_i, oriented to the first scorer. volumediff is left at 0.
std::vector<MinuteObservation> aggregate_minutes(std::span<const TickRecord> ticks,
                                                 const MatchMeta& meta);

struct FilterCounts {
    std::size_t input_matches = 0;
    std::size_t scoreless = 0;
    std::size_t early_goal = 0;
    std::size_t retained = 0;
    std::size_t observations = 0;
};

struct FilteredPanel {
    Panel panel;
    FilterCounts counts;
};

/// Drops scoreless matches and matches whose first goal falls before
/// `min_goal_minute`, aggregating the retained ones.
FilteredPanel apply_sample_filters(std::span<const MatchData> matches, int min_goal_minute = 6);

/// Stakes per team summed over every 0:0 minute with ticks, divided by the
/// number of such minutes the team played.
VolumeTable season_volumes(std::span<const MatchData> matches);

/// Sets volumediff = volume(team) - volume(opponent) on every row.
Panel compute_volumediff(Panel panel, const VolumeTable& volumes);

struct PreparedPanel {
    Panel panel;  // bookmaker panel: every retained minute, volumediff filled
    VolumeTable volumes;
    FilterCounts counts;
};

/// Filters, aggregation and volumediff in one step.
PreparedPanel prepare_panel(std::span<const MatchData> matches, int min_goal_minute = 6);

/// Removes minutes with a closed market (bettors' panel); removed minutes are
/// recorded in MatchPanel::dropped_minutes.
Panel exclude_closed_market(Panel panel);

// CSV interfaces.
std::vector<TickRecord> read_ticks_csv(const std::string& path);
void write_ticks_csv(std::ostream& out, std::span<const TickRecord> ticks, bool header = true);
std::vector<MatchMeta> read_meta_csv(const std::string& path);
void write_meta_csv(std::ostream& out, std::span<const MatchMeta> metas);
Panel read_panel_csv(const std::string& path);
void write_panel_csv(std::ostream& out, const Panel& panel);
VolumeTable read_volumes_csv(const std::string& path);
void write_volumes_csv(std::ostream& out, const VolumeTable& volumes);

/// Joins ticks to metadata by match_id; output sorted by match_id. Throws
/// DataError for ticks whose match has no metadata row.
std::vector<MatchData> join_matches(std::vector<MatchMeta> metas, std::vector<TickRecord> ticks);

}  // namespace inplay
