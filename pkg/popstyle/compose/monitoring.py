import os

import numpy as np
import pandas as pd
from matplotlib.figure import Figure

# Internal imports
from popstyle.songsym import song as Song


class GenerationLogger:
    """
    Records candidate melodies, module inputs provenance and section plans of a generation run.
    """

    def __init__ (self, save_path = None, do_save = False):
        """
        Parameters
        ----------
        save_path : str or None
            Path of candidates CSV log, provenance is saved next to it with a "_provenance.csv" suffix.
        do_save : bool
            Save logs at the end of each run.
        """
        self.save_path = save_path
        self.do_save   = do_save
        if save_path is not None:
            self.save_path_provenance = os.path.splitext(save_path)[0] + "_provenance.csv"
        self.initialize()

    def initialize (self):
        self.candidates_rows = []
        self.provenance_rows = []
        self.sections        = []

    def log_provenance (self, module, section, label, reference = None):
        """
        Logs the seed a module consumed for a section.
        Parameters
        ----------
        module : str
            "structure", "chords", "melody" or "bass".
        section : int or None
        label : str
            Provenance label of the statistics or song used.
        reference : str or None
            Alignment target of the section.
        """
        self.provenance_rows.append({"module"    : module,
                                     "section"   : section,
                                     "label"     : label,
                                     "reference" : reference})

    def log_candidates (self, section, candidates, best):
        """
        Logs candidate melodies of a section.
        Parameters
        ----------
        section : int
        candidates : list of melody.CandidateMelody
        best : melody.CandidateMelody
        """
        for i, c in enumerate(candidates):
            self.candidates_rows.append({"section"     : section,
                                         "candidate"   : i,
                                         "score"       : c.score,
                                         "n_notes"     : len(c.notes),
                                         "n_fallbacks" : c.n_fallbacks,
                                         "n_relaxed"   : c.n_relaxed,
                                         "kept"        : c is best})

    def log_section (self, section, name, reference, melody, target_frames = None):
        """
        Logs a generated section (for visualisation).
        """
        self.sections.append({"section"       : section,
                              "name"          : name,
                              "reference"     : reference,
                              "frames"        : Song.notes_to_frames(melody),
                              "target_frames" : target_frames})

    def provenance (self, module):
        """
        Labels consumed by module, in section order.
        """
        return [row["label"] for row in self.provenance_rows if row["module"] == module]

    def get_candidates_df (self):
        columns = ["section", "candidate", "score", "n_notes", "n_fallbacks", "n_relaxed", "kept"]
        return pd.DataFrame(self.candidates_rows, columns=columns)

    def get_provenance_df (self):
        return pd.DataFrame(self.provenance_rows, columns=["module", "section", "label", "reference"])

    def save_log (self):
        assert self.save_path is not None, "No save_path was given to logger."
        self.get_candidates_df().to_csv(self.save_path, index=False)
        self.get_provenance_df().to_csv(self.save_path_provenance, index=False)
        return None


class GenerationVisualiser:
    """
    Plots generated melody contours against their targets and candidate score distributions.
    """

    def __init__ (self, save_path, figsize = (16, 9)):
        self.save_path = save_path
        self.figsize   = figsize

    def make_figure (self, logger):
        """
        Returns
        -------
        fig : matplotlib.figure.Figure
        """
        fig = Figure(figsize=self.figsize)
        ax0 = fig.add_subplot(2, 1, 1)
        ax1 = fig.add_subplot(2, 1, 2)

        # -------- Contours --------
        offset = 0
        for s in logger.sections:
            frames = np.asarray(s["frames"], dtype=float)
            t = offset + np.arange(len(frames))
            ax0.step(t, np.where(frames == 0, np.nan, frames), where="post", color="k", lw=1.5)
            if s["target_frames"] is not None:
                target = np.asarray(s["target_frames"], dtype=float)[:len(frames)]
                ax0.step(offset + np.arange(len(target)), np.where(target == 0, np.nan, target), where="post",
                         color="tab:red", lw=1., alpha=0.6)
            ax0.axvline(offset, color="grey", ls="--", lw=0.8)
            ax0.text(offset + 1, 15.5, "%s (%s)" % (s["name"], s["reference"]), fontsize=9)
            offset += len(frames)
        ax0.set_xlabel("16th")
        ax0.set_ylabel("degree")
        ax0.set_ylim(0, 16.5)

        # -------- Candidate scores --------
        df = logger.get_candidates_df()
        for section, group in df.groupby("section"):
            ax1.scatter(np.full(len(group), section), group["score"], c=np.where(group["kept"], "tab:red", "k"),
                        s=12)
        ax1.set_xlabel("section")
        ax1.set_ylabel("mean log-weight")
        fig.tight_layout()
        return fig

    def save_visualisation (self, logger):
        fig = self.make_figure(logger)
        fig.savefig(self.save_path)
        return None

    def visualise (self, logger):
        try:
            self.save_visualisation(logger)
        except Exception as e:
            print("Unable to make visualisation plots: %s" % e)
