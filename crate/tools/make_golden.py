"""Reference property values for the curated molecule set.

Run with RDKit installed:

    python3 tools/make_golden.py > crates/chem/tests/data/golden_props.tsv

Columns: smiles, clogp, cmr, mw, hba, hbd, tpsa, rotb, arom, alerts, qed, sas.
"""
import os
import random
import sys

from rdkit import Chem, RDConfig
from rdkit.Chem import Crippen, QED

sys.path.append(os.path.join(RDConfig.RDContribDir, "SA_Score"))
import sascorer  # noqa: E402

HAND_PICKED = [
    "CC(=O)NCC(F)(F)Br",
    "C", "CC", "CCC", "CCCC", "CCCCC", "CCCCCC", "CCCCCCC", "CCCCCCCC",
    "CCO", "CC(=O)O", "c1ccccc1", "c1ccc2ccccc2c1", "c1ccncc1", "c1cc[nH]c1",
    "c1c[nH]cn1", "c1ccsc1", "c1ccoc1", "c1ccc2[nH]ccc2c1",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C", "CC(=O)Oc1ccccc1C(=O)O", "CC(=O)Nc1ccc(O)cc1",
    "CC(C)Cc1ccc(C(C)C(=O)O)cc1", "C1C2CC3CC1CC(C2)C3", "C1CCC2(CC1)CCCC2",
    "C1CC2CCC1C2", "C1CCCCCCCCCCC1", "C[Si](C)(C)OC", "FC(F)(F)c1ccc(Cl)cc1",
    "N#Cc1ccc(Br)cc1", "CS(=O)(=O)N1CCOCC1", "O=C1CCCCC1",
]


def main():
    corpus = [l.strip() for l in open(os.path.join(os.path.dirname(__file__), "..", "data", "zinc_le16.smi")) if l.strip()]
    rng = random.Random(20240615)
    picked = list(HAND_PICKED)
    for s in rng.sample(corpus, 200):
        if len(picked) >= 50:
            break
        if s not in picked:
            picked.append(s)
    print("# smiles\tclogp\tcmr\tmw\thba\thbd\ttpsa\trotb\tarom\talerts\tqed\tsas")
    for s in picked:
        m = Chem.MolFromSmiles(s)
        p = QED.properties(m)
        print("\t".join([
            s,
            f"{Crippen.MolLogP(m):.4f}",
            f"{Crippen.MolMR(m):.4f}",
            f"{p.MW:.4f}",
            str(p.HBA), str(p.HBD),
            f"{p.PSA:.4f}",
            str(p.ROTB), str(p.AROM), str(p.ALERTS),
            f"{QED.qed(m):.4f}",
            f"{sascorer.calculateScore(m):.4f}",
        ]))


if __name__ == "__main__":
    main()
