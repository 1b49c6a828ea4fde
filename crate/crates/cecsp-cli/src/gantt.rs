//! SVG rendering of a solved schedule as a stacked-rate chart.
//!
//! Time runs along the x axis; the y axis is the resource rate.  Each
//! interval between consecutive events becomes a column of stacked boxes,
//! one box per job consuming in it, with height equal to the job's rate
//! there.  A dashed line marks the shared capacity.

use std::fmt::Write;

use cecsp::model::{EventOrder, Instance, Schedule};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Render `schedule` as a self-contained SVG document.
///
/// The output is deterministic: equal inputs produce byte-identical SVG.
pub fn render(inst: &Instance, order: &EventOrder, schedule: &Schedule) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;

    let makespan = inst
        .event_ids()
        .map(|e| schedule.time(e))
        .fold(0.0_f64, f64::max)
        .max(1e-9);

    // The y scale must fit the capacity line and any stack that overshoots it
    // (relaxed schedules may exceed the nominal capacity).
    let mut peak = inst.capacity();
    for q in 0..order.interval_count() {
        let key = order.interval_key(q);
        let begin = schedule.time(order.at(q));
        let end = schedule.time(order.at(q + 1));
        let len = end - begin;
        if len <= 1e-12 {
            continue;
        }
        let stacked: f64 = inst
            .job_ids()
            .map(|j| schedule.consumed(j, key) / len)
            .sum();
        peak = peak.max(stacked);
    }

    let x = |t: f64| LEFT + t / makespan * plot_w;
    let y = |rate: f64| TOP + plot_h - rate / peak * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // Stacked consumption boxes, one column per interval.
    for q in 0..order.interval_count() {
        let key = order.interval_key(q);
        let begin = schedule.time(order.at(q));
        let end = schedule.time(order.at(q + 1));
        let len = end - begin;
        if len <= 1e-12 {
            continue;
        }
        let mut base = 0.0;
        for (index, job) in inst.job_ids().enumerate() {
            let amount = schedule.consumed(job, key);
            if amount <= 0.0 {
                continue;
            }
            let rate = amount / len;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="white" stroke-width="0.5"/>"#,
                x(begin),
                y(base + rate),
                x(end) - x(begin),
                y(base) - y(base + rate),
                color(index, inst.n()),
            );
            base += rate;
        }
    }

    // Capacity line.
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6 4"/>"#,
        x(0.0),
        y(inst.capacity()),
        x(makespan),
        y(inst.capacity()),
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
        x(0.0) - 6.0,
        y(inst.capacity()) + 4.0,
        trim(inst.capacity()),
    );

    // Axes.
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h,
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}" stroke="black"/>"#,
        TOP + plot_h,
    );

    // Event-time ticks along the x axis.
    let mut ticks: Vec<f64> = std::iter::once(0.0)
        .chain(inst.event_ids().map(|e| schedule.time(e)))
        .collect();
    ticks.sort_by(|a, b| a.total_cmp(b));
    ticks.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    for t in ticks {
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/>"#,
            x(t),
            TOP + plot_h,
            TOP + plot_h + 5.0,
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            x(t),
            TOP + plot_h + 18.0,
            trim(t),
        );
    }

    // Legend.
    for (index, job) in inst.job_ids().enumerate() {
        let ly = TOP + 16.0 * index as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#,
            LEFT + plot_w + 16.0,
            ly,
            color(index, inst.n()),
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">job {}</text>"#,
            LEFT + plot_w + 34.0,
            ly + 10.0,
            job.index(),
        );
    }

    svg.push_str("</svg>\n");
    svg
}

fn color(index: usize, n: usize) -> String {
    let hue = index * 360 / n.max(1);
    format!("hsl({hue}, 65%, 55%)")
}

/// Format an axis value without trailing zero noise.
fn trim(value: f64) -> String {
    let s = format!("{value:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cecsp::evaluator::{score_order, PenaltyWeights};
    use cecsp::model::Job;
    use cecsp::search::greedy_initial_order;

    fn solved() -> (Instance, EventOrder, Schedule) {
        let inst = Instance::new(
            30.0,
            vec![
                Job { energy: 10.0, release: 0.0, deadline: 4.0, rate_min: 0.0, rate_max: 10.0, weight: 1.0, offset: 0.0 },
                Job { energy: 12.0, release: 1.0, deadline: 5.0, rate_min: 0.0, rate_max: 8.0, weight: 2.0, offset: 0.0 },
            ],
        )
        .unwrap();
        let order = greedy_initial_order(&inst);
        let schedule = score_order(&inst, &order, PenaltyWeights::default())
            .unwrap()
            .into_schedule()
            .unwrap();
        (inst, order, schedule)
    }

    #[test]
    fn the_chart_is_valid_svg_with_one_legend_entry_per_job() {
        let (inst, order, schedule) = solved();
        let svg = render(&inst, &order, &schedule);
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("job 1<").count(), 1);
        assert_eq!(svg.matches("job 2<").count(), 1);
        // Every opened tag family is closed or self-closing; a cheap sanity
        // proxy is balanced angle brackets.
        assert_eq!(svg.matches('<').count(), svg.matches('>').count());
    }

    #[test]
    fn rendering_is_deterministic() {
        let (inst, order, schedule) = solved();
        assert_eq!(
            render(&inst, &order, &schedule),
            render(&inst, &order, &schedule)
        );
    }
}
