"""Regenerates the notebook fixtures under tests/fixtures/.

Run from the repo root: python3 scripts/make_fixtures.py
"""

import json
import os
import struct
import zlib

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "tests", "fixtures")


def tiny_png(width=8, height=6, rgb=(200, 60, 60)) -> bytes:
    """A minimal valid RGB PNG."""
    def chunk(tag, data):
        raw = tag + data
        return struct.pack(">I", len(data)) + raw + struct.pack(">I", zlib.crc32(raw))

    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    row = b"\x00" + bytes(rgb) * width
    idat = zlib.compress(row * height)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", idat)
        + chunk(b"IEND", b"")
    )


def code_cell(source, outputs=None, cell_id=None):
    cell = {
        "cell_type": "code",
        "execution_count": 1,
        "metadata": {},
        "outputs": outputs or [],
        "source": source,
    }
    if cell_id:
        cell["id"] = cell_id
    return cell


def png_output(png_bytes):
    import base64

    return {
        "output_type": "display_data",
        "data": {"image/png": base64.b64encode(png_bytes).decode("ascii")},
        "metadata": {},
    }


def table_output(html):
    return {
        "output_type": "execute_result",
        "execution_count": 1,
        "data": {"text/html": html, "text/plain": "<DataFrame>"},
        "metadata": {},
    }


def notebook(cells):
    return {
        "cells": cells,
        "metadata": {"kernelspec": {"name": "python3", "display_name": "Python 3"}},
        "nbformat": 4,
        "nbformat_minor": 5,
    }


HEAD_TABLE = (
    "<table><tr><th>Id</th><th>SalePrice</th><th>LotFrontage</th></tr>"
    "<tr><td>1</td><td>208500</td><td>65</td></tr>"
    "<tr><td>2</td><td>181500</td><td>80</td></tr></table>"
)


def house_prices_cells(png):
    sources = [
        # data introduction
        "import pandas as pd\nimport numpy as np\nimport matplotlib.pyplot as plt",
        "train = pd.read_csv('train.csv')\ntest = pd.read_csv('test.csv')",
        ("train.head()", [table_output(HEAD_TABLE)]),
        "train.shape, test.shape",
        "train.describe()",
        "train.info()",
        "train['SalePrice'].describe()",
        ("plt.hist(train['SalePrice'], bins=50)", [png_output(png)]),
        "numeric_data = train.select_dtypes(include=[np.number])",
        "categorical_data = train.select_dtypes(include=['object'])",
        # cleaning: missing values
        "missing = train.isnull().sum().sort_values(ascending=False)",
        "missing_ratio = missing / len(train)",
        "train = train.drop(columns=missing[missing_ratio > 0.8].index)",
        "train['LotFrontage'] = train['LotFrontage'].fillna(train['LotFrontage'].median())",
        "train = train.fillna(train.mode().iloc[0])",
        # important features
        "correlation = numeric_data.corr()",
        "important_features = correlation['SalePrice'].sort_values(ascending=False)",
        ("plt.bar(important_features.index[:10], important_features[:10])", [png_output(png)]),
        "top_features = important_features.index[:10].tolist()",
        # outliers
        "quality_price = train[['OverallQual', 'SalePrice']]",
        ("plt.scatter(train['GrLivArea'], train['SalePrice'])", [png_output(png)]),
        "outliers = train[train['GrLivArea'] > 4000]",
        "train = train.drop(outliers.index)",
        ("plt.scatter(train['LotFrontage'], train['SalePrice'])", [png_output(png)]),
        "price_std = train['SalePrice'].std()\ntrain = train[train['SalePrice'] < price_std * 3 + train['SalePrice'].mean()]",
        # scaling
        "from sklearn.preprocessing import StandardScaler\nscaling = StandardScaler()",
        "log_price = np.log1p(train['SalePrice'])",
        "scaled_features = scaling.fit_transform(train[top_features])",
        "skewness = numeric_data.skew()",
        "skewed = skewness[abs(skewness) > 0.75].index",
        # feature selection / engineering
        "train['TotalSF'] = train['TotalBsmtSF'] + train['1stFlrSF'] + train['2ndFlrSF']",
        "selected_features = [f for f in top_features if f in train.columns]",
        "encoded = pd.get_dummies(train[selected_features])",
        "X = encoded\ny = log_price",
        "from sklearn.model_selection import train_test_split\nX_train, X_valid, y_train, y_valid = train_test_split(X, y)",
        # findings / modeling
        "from sklearn.linear_model import LinearRegression\nmodel = LinearRegression()",
        "model.fit(X_train, y_train)",
        "predictions = model.predict(X_valid)",
        "from sklearn.metrics import mean_squared_error\nrmse = np.sqrt(mean_squared_error(y_valid, predictions))",
        ("plt.scatter(y_valid, predictions)", [png_output(png)]),
        "print('validation rmse', rmse)",
        "submission = pd.DataFrame({'Id': test['Id'], 'SalePrice': np.expm1(model.predict(X))})",
    ]
    cells = []
    for i, entry in enumerate(sources):
        if isinstance(entry, tuple):
            source, outputs = entry
        else:
            source, outputs = entry, []
        cells.append(code_cell(source, outputs, cell_id=f"hp{i:02d}"))
    return cells


def toy8_cells(png):
    sources = [
        "import pandas as pd\ntrain = pd.read_csv('train.csv')",
        "train.describe()\ntrain.head()",
        "corr = train.corr()\nimportant = corr['SalePrice'].sort_values()",
        "outliers = detect_outliers(train)\ntrain = remove_outliers(train, outliers)",
        "scaling = StandardScaler()\nX = scaling.fit_transform(X)",
        "selected = select_features(train, k=10)",
        "model = LinearRegression()\nmodel.fit(X_train, y_train)",
        ("plt.scatter(train['LotFrontage'], train['SalePrice'])", [png_output(png)]),
    ]
    cells = []
    for i, entry in enumerate(sources):
        if isinstance(entry, tuple):
            source, outputs = entry
        else:
            source, outputs = entry, []
        cells.append(code_cell(source, outputs, cell_id=f"toy{i}"))
    return cells


def main():
    os.makedirs(FIXTURES, exist_ok=True)
    png = tiny_png()
    with open(os.path.join(FIXTURES, "house_prices.ipynb"), "w") as fh:
        json.dump(notebook(house_prices_cells(png)), fh, indent=1)
    with open(os.path.join(FIXTURES, "toy8.ipynb"), "w") as fh:
        json.dump(notebook(toy8_cells(png)), fh, indent=1)
    with open(os.path.join(FIXTURES, "scenario_outline.txt"), "w") as fh:
        fh.write(
            "Data Introduction\n"
            "Data Cleaning\n"
            "  Finding Important Features\n"
            "  Removing Outliers\n"
            "  Scaling\n"
            "  Selecting Features\n"
            "Findings\n"
        )
    print("fixtures written to", os.path.abspath(FIXTURES))


if __name__ == "__main__":
    main()
