"""Exports the property-calculator tables shipped in crates/chem/data.

The atom-type contributions, QED parameters and alert lists, and the
synthetic-accessibility fragment scores are taken from an RDKit
installation:

    python3 tools/export_tables.py crates/chem/data
"""
import gzip
import os
import pickle
import sys

from rdkit import RDConfig
from rdkit.Chem import QED


# The shipped text table spells two hydrogen rows with aliphatic symbols,
# which also match hydrogens on aromatic nitrogen. The compiled-in RDKit
# parameters use atomic numbers; mirror those.
CRIPPEN_FIXES = {
    "[#1]O[!C;!N;!O;!S]": "[#1]O[!#6;!#7;!#8;!#16]",
    "[#1][!C;!N;!O]": "[#1][!#6;!#7;!#8]",
}


def crippen(out):
    src = os.path.join(RDConfig.RDDataDir, "Crippen.txt")
    with open(out, "w") as f:
        f.write("# Wildman-Crippen atom types, first match wins, file order matters.\n")
        f.write("# type\tpattern\tlogp\tmr\n")
        for line in open(src):
            if line.startswith("#") or not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 3 or not parts[1]:
                continue
            parts[1] = CRIPPEN_FIXES.get(parts[1], parts[1])
            mr = parts[3] if len(parts) > 3 and parts[3] != "" else "0"
            f.write(f"{parts[0]}\t{parts[1]}\t{parts[2]}\t{mr}\n")


def qed(outdir):
    names = ["MW", "ALOGP", "HBA", "HBD", "PSA", "ROTB", "AROM", "ALERTS"]
    with open(os.path.join(outdir, "qed_params.tsv"), "w") as f:
        f.write("# Asymmetric double sigmoid desirability parameters and mean weights.\n")
        f.write("# descriptor\ta\tb\tc\td\te\tf\tdmax\tweight\n")
        for name, w in zip(names, QED.WEIGHT_MEAN):
            p = QED.adsParameters[name]
            vals = [p.A, p.B, p.C, p.D, p.E, p.F, p.DMAX, w]
            f.write(name + "\t" + "\t".join(repr(float(v)) for v in vals) + "\n")
    with open(os.path.join(outdir, "qed_alerts.patterns"), "w") as f:
        f.write("# Structural alerts; each pattern with at least one match counts once.\n")
        for s in QED.StructuralAlertSmarts:
            f.write(s + "\n")
    with open(os.path.join(outdir, "qed_acceptors.patterns"), "w") as f:
        f.write("# Hydrogen-bond acceptor patterns; matches are summed over patterns.\n")
        for s in QED.AcceptorSmarts:
            f.write(s + "\n")


def sas(out):
    src = os.path.join(RDConfig.RDContribDir, "SA_Score", "fpscores.pkl.gz")
    groups = pickle.load(gzip.open(src))
    with gzip.GzipFile(out, "wb", mtime=0) as f:
        f.write(b"# Morgan radius-2 fragment scores, one score per line followed by\n")
        f.write(b"# the space-separated fragment identifiers sharing it. Later lines win.\n")
        for g in groups:
            f.write(("%r\t%s\n" % (float(g[0]), " ".join(str(i) for i in g[1:]))).encode())


def main():
    outdir = sys.argv[1]
    crippen(os.path.join(outdir, "crippen.tsv"))
    qed(outdir)
    sas(os.path.join(outdir, "sas_fragments.tsv.gz"))


if __name__ == "__main__":
    main()
