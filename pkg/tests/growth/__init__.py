# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.
