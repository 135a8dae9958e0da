import json
from pathlib import Path

import pytest

SCHEMA_LINE = "# schema=rampmcmc-csv-v1"
CONFIG_LINE = '# config={"model": "sample"}'


def write_rows(path: Path, header: str, rows: list[str]) -> Path:
    lines = [SCHEMA_LINE, CONFIG_LINE, header, *rows]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def bound_csv(tmp_path):
    rows = []
    for n in (8, 12, 16):
        for i, alpha in enumerate((0.0, 1.0, 2.0, 4.0)):
            bound = 10.0 ** (-1 - 0.05 * n) * (1 + i)
            rows.append(f"{n},5,1.5,{alpha},{bound},1e-09,{bound*0.6},{bound*0.4}")
    return write_rows(
        tmp_path / "ising_bound.csv",
        "N,beta,h,alpha,bound,tail_term,sector0_term,sector1_term",
        rows,
    )


@pytest.fixture
def gap_csv(tmp_path):
    rows = []
    for n in (8, 12):
        for alpha in (0.0, 1.0, 2.0):
            delta = 10.0 ** (-1 - 0.06 * n) * (1 + alpha)
            rows.append(f"ising,{n},0,{alpha},inf,1.5,5,{delta},{1-delta},1e-12,1e-12")
    return write_rows(
        tmp_path / "gap_scan.csv",
        "model,N,seed,alpha,kappa,h,beta,delta,lambda2,db_residual,stationarity_residual",
        rows,
    )


@pytest.fixture
def summary_csv(tmp_path):
    rows = []
    for n in (5, 6, 7, 8):
        for alpha in (0.0, 2.0, float(n), 16.0):
            mean = 2.0 ** (-0.2 * n) * (0.05 + 0.02 * min(alpha, 8.0))
            rows.append(f"sk,{n},{alpha},inf,1.5,5,{mean},{mean*0.05},20")
    return write_rows(
        tmp_path / "disorder_summary.csv",
        "model,N,alpha,kappa,h,beta,mean_delta,std_err,count",
        rows,
    )


@pytest.fixture
def kappa_csv(tmp_path):
    rows = []
    for i in range(16):
        kappa = 100.0 * 10 ** (i / 5.0)
        rows.append(f"sk,6,123,4,{kappa},1.5,5,{0.08 + 0.02 * ((-1) ** i)}")
    rows.append("sk,6,123,4,avg,1.5,5,0.08")
    rows.append("sk,6,123,4,inf,1.5,5,0.085")
    return write_rows(
        tmp_path / "kappa_scan.csv",
        "model,N,seed,alpha,kappa,h,beta,delta",
        rows,
    )


@pytest.fixture
def fit_json(tmp_path):
    path = tmp_path / "fit.json"
    path.write_text(json.dumps({
        "schema": "rampmcmc-json-v1",
        "kind": "exponential",
        "exponent": 0.2,
        "err": 0.01,
        "chi2_nu": 1.1,
        "points_used": 4,
        "select": "peak",
    }))
    return path
