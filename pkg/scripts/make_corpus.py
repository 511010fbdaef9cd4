"""Regenerate src/screenkit/data/corpus.smi.

Three blocks: hand-entered drug-like molecules, para-substituted anilide
analogs (graded similarity to a reference ligand), and random QM9-scale
graphs grown atom by atom. Generated entries are written with random
traversal orders so the corpus exercises the parser on non-canonical input.
"""

import random
from pathlib import Path

from screenkit.chem import Molecule, parse_smiles, random_smiles, write_smiles

DRUGS = """\
CC(=O)Nc1ccc(O)cc1 paracetamol
CC(=O)Oc1ccccc1C(=O)O aspirin
CC(C)Cc1ccc(cc1)C(C)C(=O)O ibuprofen
Cn1cnc2c1c(=O)n(C)c(=O)n2C caffeine
COc1ccc2cc(ccc2c1)C(C)C(=O)O naproxen
OC(=O)Cc1ccccc1Nc1c(Cl)cccc1Cl diclofenac
CN1CCC[C@H]1c1cccnc1 nicotine_stereo_placeholder
CN(C)C(=N)NC(=N)N metformin
NCCc1ccc(O)c(O)c1 dopamine
NCCc1c[nH]c2ccc(O)cc12 serotonin
CNCC(O)c1ccc(O)c(O)c1 epinephrine
CC(C)NCC(O)COc1cccc2ccccc12 propranolol
Clc1ccc(cc1)C(c1ccccc1)N1CCN(CC1)CCOCC(=O)O cetirizine
CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc12 diazepam
O=C(O)c1ccccc1O salicylic_acid
OC(=O)c1ccccc1 benzoic_acid
Oc1ccccc1 phenol
Nc1ccccc1 aniline
c1ccncc1 pyridine
c1ccc2[nH]ccc2c1 indole
c1ccc2ncccc2c1 quinoline
c1cnc2ncnc2c1 purine_like
O=C1NC(=O)C(N1)=O imidazolidinetrione
CC(C)(C)NCC(O)c1ccc(O)c(CO)c1 salbutamol
COc1cc(CC=C)ccc1O eugenol
CC(=O)OCC[N+](C)(C)C acetylcholine
OCC(O)CO glycerol
OC(=O)CC(O)(CC(=O)O)C(=O)O citric_acid
NC(Cc1ccccc1)C(=O)O phenylalanine
NC(CS)C(=O)O cysteine
NC(CCSC)C(=O)O methionine
NC(Cc1c[nH]cn1)C(=O)O histidine
NC(CCCNC(=N)N)C(=O)O arginine
OC1C(O)C(O)C(O)C(O)C1O inositol
CCOC(=O)c1ccc(N)cc1 benzocaine
CCN(CC)CC(=O)Nc1c(C)cccc1C lidocaine
CN1CCC(CC1)=C1c2ccccc2C=Cc2ccccc12 cyproheptadine
Fc1ccc(cc1)C(=O)CCCN1CCC(O)(CC1)c1ccc(Cl)cc1 haloperidol
CS(=O)(=O)Nc1ccc(cc1)[N+](=O)[O-] nitro_sulfonamide
NS(=O)(=O)c1cc(C(=O)O)c(NCc2ccco2)cc1Cl furosemide
Cc1ccc(cc1)S(=O)(=O)NC(=O)NN1CCCCCC1 tolazamide_like
CC1(C)SC2C(NC(=O)Cc3ccccc3)C(=O)N2C1C(=O)O penicillin_g
Nc1ncnc2[nH]cnc12 adenine
O=c1cc[nH]c(=O)[nH]1 uracil
Cc1c[nH]c(=O)[nH]c1=O thymine
Nc1cc[nH]c(=O)n1 cytosine
C1CCOC1 thf
C1COCCO1 dioxane
C1CCNCC1 piperidine
C1CNCCN1 piperazine
C1CCOCC1 oxane
O=C1CCCCC1 cyclohexanone
CC(=O)C acetone
CCO ethanol
CCCCCCCCCCCCCCCC(=O)O palmitic_acid
ClC(Cl)Cl chloroform
FC(F)(F)c1ccc(Oc2ccc(cc2)C(F)(F)F)cc1 bis_trifluoromethyl
BrCCBr dibromoethane
Ic1ccccc1 iodobenzene
OP(=O)(O)O phosphoric_acid
COP(=S)(OC)Oc1ccc(cc1)[N+](=O)[O-] methyl_parathion
CSC dimethyl_sulfide
CS(C)=O dmso
C#N hydrogen_cyanide
CC#N acetonitrile
C=C ethylene
C#C acetylene
C=CC=C butadiene
c1ccc(cc1)-c1ccccc1 biphenyl
c1ccc2cc3ccccc3cc2c1 anthracene
C1CC2CCC1C2 norbornane
C12C3C4C1C5C2C3C45 cubane
C1CC11CC1 spiropentane
CC(C)(C)c1ccc(O)cc1 tert_butylphenol
OC(=O)c1cccnc1 nicotinic_acid
NC(=O)c1cccnc1 nicotinamide
Oc1ncnc2[nH]cnc12 hypoxanthine_tautomer
CC(=O)NCCc1c[nH]c2ccc(OC)cc12 melatonin
CCCCC1C(=O)N(N(C1=O)c1ccccc1)c1ccccc1 phenylbutazone
CN1CCN(CC1)C(c1ccccc1)c1ccc(Cl)cc1 chlorcyclizine
COc1ccc(CCN)cc1 methoxyphenethylamine
OC(c1ccccc1)(c1ccccc1)C(=O)O benzilic_acid
C[C@@H](N)C(=O)O alanine_stereo_placeholder
NC(=O)N urea
NC(N)=O urea_alt
OC(=O)C(=O)O oxalic_acid
OCCO ethylene_glycol
O=C=O carbon_dioxide
N#N nitrogen
O=O oxygen
[O-][N+](=O)c1ccc(cc1)C(=O)O nitrobenzoic_acid
C[n+]1ccccc1 methylpyridinium
[Cl-].C[NH3+] methylammonium_chloride
OC(=O)CN(CC(=O)O)CC(=O)O nitrilotriacetic_acid
c1ccc2c(c1)oc1ccccc12 dibenzofuran
c1ccc2c(c1)sc1ccccc12 dibenzothiophene
c1csc(n1)N aminothiazole
Cc1onc(c1)C methylisoxazole_like
c1cn[nH]c1 pyrazole
c1c[nH]cn1 imidazole
c1nnc[nH]1 triazole
O=C1c2ccccc2C(=O)N1 phthalimide
CC1=CC(=O)C=CC1=O methylbenzoquinone
OC1=CC=CC=C1 phenol_kekule
C1=CC=C(C=C1)C(=O)O benzoic_kekule
CC(C)C[C@H](N)C(=O)O leucine_stereo_placeholder
""".splitlines()

REFERENCE = "CC(=O)Nc1ccc(O)cc1"
ACYL = ["CC(=O)N", "CCC(=O)N", "O=CN", "CC(=O)N(C)", "CN", "N", "CC(C)C(=O)N", "NC(=O)N", "CS(=O)(=O)N", "CC(=O)O"]
PARA = ["O", "OC", "N", "C", "F", "Cl", "C(=O)O", "OCC", "Br", "C#N"]


def analogs(rng):
    out = []
    for a in ACYL:
        for p in PARA:
            out.append(f"{a}c1ccc({p})cc1")
    rng.shuffle(out)
    return out[:70]


def grow(rng: random.Random, size: int) -> Molecule | None:
    weights = {"C": 0.62, "N": 0.15, "O": 0.18, "F": 0.05}
    cap = {"C": 4, "N": 3, "O": 2, "F": 1}
    els = [rng.choices(list(weights), list(weights.values()))[0]]
    bonds: dict[tuple[int, int], int] = {}

    def free(k):
        return cap[els[k]] - sum(o for (i, j), o in bonds.items() if k in (i, j))

    while len(els) < size:
        hosts = [k for k in range(len(els)) if free(k) > 0]
        if not hosts:
            return None
        host = rng.choice(hosts)
        el = rng.choices(list(weights), list(weights.values()))[0]
        order = 1
        r = rng.random()
        if r < 0.15:
            order = 2
        elif r < 0.2:
            order = 3
        order = min(order, free(host), cap[el])
        els.append(el)
        bonds[(host, len(els) - 1)] = order
    if rng.random() < 0.45:
        cands = [(i, j) for i in range(len(els)) for j in range(i + 2, len(els))
                 if (i, j) not in bonds and free(i) > 0 and free(j) > 0]
        if cands:
            bonds[rng.choice(cands)] = 1
    return Molecule.from_graph(els, [(i, j, o) for (i, j), o in bonds.items()])


def main():
    rng = random.Random(20240601)
    lines = ["# screenkit bundled corpus: SMILES<TAB>name"]
    seen = set()

    def add(mol, name, text=None):
        canon = write_smiles(mol)
        if canon in seen:
            return
        seen.add(canon)
        lines.append(f"{text or random_smiles(mol, rng)}\t{name}")

    for line in DRUGS:
        if not line.strip() or "@" in line:
            continue
        smi, name = line.split()
        add(parse_smiles(smi), name, smi)
    for k, smi in enumerate(analogs(rng)):
        add(parse_smiles(smi), f"analog{k:03d}")
    k = 0
    while len(lines) < 561:
        mol = grow(rng, rng.randint(3, 9))
        if mol is None:
            continue
        add(mol, f"gen{k:04d}")
        k += 1
    out = Path(__file__).resolve().parents[1] / "src" / "screenkit" / "data" / "corpus.smi"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines) - 1} molecules to {out}")


if __name__ == "__main__":
    main()
