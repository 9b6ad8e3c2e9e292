import logging

from resonancewrangler import runfolder
from resonancewrangler.command import UserError, register_command

log = logging.getLogger(__name__)

# Script name -> (CSV it plots, gnuplot body).
SCRIPTS = {
    "q_norm.gp": ("averaging.csv", """set datafile separator ','
set key autotitle columnhead
set logscale xy
set xlabel 'eps'
set ylabel '||Q x*||_alpha'
plot 'averaging.csv' using 1:3 with linespoints title '||Q x*||_alpha'
"""),
    "kernel_trace.gp": ("kernel_trace.csv", """set datafile separator ','
set key autotitle columnhead
set xlabel 'eps'
set ylabel 'kernel coordinate'
plot 'kernel_trace.csv' using 1:3 with linespoints title 'fixed point', \\
     '' using 1:4 with lines title 'root of g'
"""),
    "orbit_heatmap.gp": ("orbit.csv", """set datafile separator ','
set xlabel 'node'
set ylabel 'sample'
set view map
plot 'orbit.csv' matrix rowheaders columnheaders every ::1 with image
"""),
}


def emit_plot_scripts(run_dir):
    """Writes a gnuplot script for each plottable CSV the run's manifest lists. Returns (written, skipped) script names; a directory without a manifest skips everything."""
    if not runfolder.RunFolder.check(run_dir):
        return [], sorted(SCRIPTS)

    folder = runfolder.RunFolder(run_dir)
    written, skipped = [], []
    with folder.open_manifest() as mf:
        listed = set(mf.search("kind", "csv", False))
        for name in sorted(SCRIPTS):
            table, body = SCRIPTS[name]
            if table not in listed or table not in folder:
                log.debug("skipping %s: %s is missing", name, table)
                skipped.append(name)
                continue
            folder.write_text(mf, name, body, "gnuplot", "plots %s" % table)
            written.append(name)
    return written, skipped


@register_command("plots")
class PlotsCommand(object):

    _help = "Write gnuplot scripts for the CSVs of a run."

    _description = "Writes one gnuplot command file per plottable CSV listed in the manifest of a run directory (eps against ||Q x*||, the kernel coordinate trace, the orbit heatmap) and adds them to the manifest. Missing CSVs are listed as skipped."

    @staticmethod
    def specify_args(parser):
        parser.add_argument("run_dir", help="A directory written by the run command.")

    def run(self, args):
        written, skipped = emit_plot_scripts(args.run_dir)
        if not written and not runfolder.RunFolder.check(args.run_dir):
            raise UserError("%s is not a run directory" % args.run_dir)
        for name in written:
            print("wrote %s" % name)
        for name in skipped:
            print("skipped %s" % name)
        return 0
